import copy
import json

import pytest

from mwmethod import serialize
from mwmethod.descent import basic_descent, extract_model, recursive_chain
from mwmethod.scenario import load_bundled
from mwmethod.verify import verify_certificate


def _descent(sc):
    return basic_descent(sc.lam, sc.gamma, sc.A, sc.B, sc.m, sc.make_system(), sc.descent_params())


def _chain(sc):
    return recursive_chain(sc.lam, sc.A, sc.B, sc.m, sc.make_system(), sc.n,
                           sc.budgets["chain_depth"], sc.descent_params())


@pytest.fixture(scope="module")
def z100():
    sc = load_bundled("cyclic100-interval10")
    return sc, _descent(sc).to_json()


@pytest.fixture(scope="module")
def z64():
    sc = load_bundled("cyclic64-interval16")
    chain = _chain(sc)
    return sc, chain.to_json(), extract_model(chain, sc.lam, sc.n).to_json()


def _failed(cert, sc):
    return {c.name for c in verify_certificate(cert, sc).failed()}


@pytest.mark.parametrize("name", ["cyclic100-interval10", "dihedral12-vertices",
                                  "dihedral6-weighted-union", "heisenberg3-ball", "cyclic60-mu"])
def test_produced_descent_passes(name):
    sc = load_bundled(name)
    cert = _descent(sc)
    verdict = verify_certificate(cert, sc)
    assert verdict.ok, verdict.failed()
    # the JSON text round trip verifies too
    assert verify_certificate(json.loads(serialize.dumps(cert.to_json())), sc).ok


def test_produced_chain_and_model_pass(z64):
    sc, chain, model = z64
    assert verify_certificate(chain, sc).ok
    assert verify_certificate(model, sc).ok


def test_extra_element_in_D_fails(z100):
    sc, cert = z100
    S = set(range(-20, 21))
    g = next(x for x in range(100) if (x if x < 50 else x - 100) not in S)
    bad = copy.deepcopy(cert)
    bad["D"] = sorted(set(bad["D"]) | {g})
    assert "power_check" in _failed(bad, sc)


def test_decremented_k_fails(z64):
    sc, chain, _ = z64
    mutated = 0
    for i, step in enumerate(chain["steps"]):
        if step["k"] <= 1:
            continue
        mutated += 1
        bad = copy.deepcopy(chain)
        bad["steps"][i]["k"] -= 1
        failed = _failed(bad, sc)
        assert any("S_in_power" in name or "k_least" in name or "power" in name for name in failed)
    assert mutated


def test_changed_K_fails(z64):
    sc, _, model = z64
    bad = copy.deepcopy(model)
    bad["K"] = sorted(set(bad["K"]) | {1})
    assert _failed(bad, sc)


def test_descent_field_mutations_fail(z100):
    sc, cert = z100
    for key, value in [("k", cert["k"] + 1), ("W", cert["W"][:-1]), ("k_bound", cert["k_bound"] + 1),
                       ("m_AB", "1"), ("f_values", cert["f_values"][:-1]), ("n", cert["n"] + 1)]:
        bad = copy.deepcopy(cert)
        bad[key] = value
        assert _failed(bad, sc), key


def test_unknown_kind_and_malformed(z100):
    sc, cert = z100
    assert not verify_certificate({"kind": "other"}, sc).ok
    bad = copy.deepcopy(cert)
    bad["D"] = "everything"
    assert not verify_certificate(bad, sc).ok


def test_verdict_json(z100):
    sc, cert = z100
    out = verify_certificate(cert, sc).to_json()
    assert out["ok"] and out["kind"] == "descent"
    assert all({"clause", "ok"} <= set(c) for c in out["clauses"])


def test_understated_exact_flag_fails(z100):
    sc, cert = z100
    assert cert["cover_witness"]["exact"] is True
    bad = copy.deepcopy(cert)
    bad["cover_witness"]["exact"] = False
    assert "cover_exact_claim" in _failed(bad, sc)
