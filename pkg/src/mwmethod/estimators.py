"""Estimator-style wrappers around the descent and the recursive chain.

``fit`` takes a scenario (a :class:`~mwmethod.scenario.Scenario`, a decoded
scenario dict, or a path) and stores the certificate; ``transform`` maps group
elements through the fitted result.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .descent import DescentParams, basic_descent, extract_model, recursive_chain
from .errors import ValidationError
from .scenario import Scenario, load_scenario, parse_scenario


def check_scenario(X) -> Scenario:
    """Accept a Scenario, a scenario dict or a path to a scenario file."""
    if isinstance(X, Scenario):
        return X
    if isinstance(X, dict):
        return parse_scenario(X)
    if isinstance(X, (str, Path)):
        return load_scenario(X)
    raise ValidationError("X", f"expected a scenario, got {type(X).__name__}")


def check_elements(X, order: int) -> np.ndarray:
    """A 1-d integer array of group element indices."""
    arr = np.asarray(X)
    if arr.ndim != 1 or (arr.size and not np.issubdtype(arr.dtype, np.integer)):
        raise ValidationError("X", "expected a 1-d array of element indices")
    if arr.size and (arr.min() < 0 or arr.max() >= order):
        raise ValidationError("X", f"element indices must lie in 0..{order - 1}")
    return arr.astype(np.int64)


def _check_positive(name: str, value, allow_none: bool = False):
    if value is None and allow_none:
        return
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValidationError(name, f"must be a positive integer, got {value!r}")


class BasicDescent(TransformerMixin, BaseEstimator):
    """Find a certified symmetric D with ``Dⁿ ⊆ S_Γ(AB)``.

    ``n=None`` takes the target power from the scenario. After ``fit``,
    ``certificate_`` holds the :class:`~mwmethod.descent.DescentCertificate`
    and ``transform`` reports membership of elements in D.
    """

    def __init__(self, n=None, max_translators=4, max_candidates=256, max_rounds=64,
                 n_jobs=1, exact_only=False):
        self.n = n
        self.max_translators = max_translators
        self.max_candidates = max_candidates
        self.max_rounds = max_rounds
        self.n_jobs = n_jobs
        self.exact_only = exact_only

    def _params(self, scenario: Scenario) -> DescentParams:
        _check_positive("n", self.n, allow_none=True)
        for name in ("max_translators", "max_candidates", "max_rounds", "n_jobs"):
            _check_positive(name, getattr(self, name))
        return DescentParams(scenario.n if self.n is None else self.n, self.max_translators,
                             self.max_candidates, self.max_rounds, self.n_jobs,
                             bool(self.exact_only))

    def fit(self, X, y=None):
        sc = check_scenario(X)
        params = self._params(sc)
        self.certificate_ = basic_descent(sc.lam, sc.gamma, sc.A, sc.B, sc.m,
                                          sc.make_system(), params)
        self.D_ = self.certificate_.D
        self.k_ = self.certificate_.k
        self.n_features_in_ = sc.group.order
        return self

    def transform(self, X):
        check_is_fitted(self, "certificate_")
        idx = check_elements(X, self.n_features_in_)
        members = np.array([x in self.D_ for x in idx.tolist()], dtype=bool)
        return members


class RecursiveChain(TransformerMixin, BaseEstimator):
    """Run the recursive chain and, if it stabilizes, extract the quotient model.

    After ``fit``, ``chain_`` holds the chain certificate and ``model_`` the
    :class:`~mwmethod.descent.QuotientModel` (None if the chain did not
    stabilize). ``transform`` sends elements of ⟨Λ⟩ to their coset index.
    """

    def __init__(self, n=None, depth_budget=None, max_translators=4, max_candidates=256,
                 max_rounds=64, n_jobs=1, exact_only=False):
        self.n = n
        self.depth_budget = depth_budget
        self.max_translators = max_translators
        self.max_candidates = max_candidates
        self.max_rounds = max_rounds
        self.n_jobs = n_jobs
        self.exact_only = exact_only

    def fit(self, X, y=None):
        sc = check_scenario(X)
        _check_positive("n", self.n, allow_none=True)
        depth = sc.budgets["chain_depth"] if self.depth_budget is None else self.depth_budget
        if isinstance(depth, bool) or not isinstance(depth, int) or depth < 0:
            raise ValidationError("depth_budget", f"must be a nonnegative integer, got {depth!r}")
        n = sc.n if self.n is None else self.n
        params = BasicDescent(n, self.max_translators, self.max_candidates, self.max_rounds,
                              self.n_jobs, self.exact_only)._params(sc)
        self.chain_ = recursive_chain(sc.lam, sc.A, sc.B, sc.m, sc.make_system(), n, depth, params)
        self.model_ = (extract_model(self.chain_, sc.lam, n)
                       if self.chain_.termination == "stabilized" else None)
        self.n_features_in_ = sc.group.order
        return self

    def transform(self, X):
        check_is_fitted(self, "chain_")
        if self.model_ is None:
            raise ValidationError("model", "the chain did not stabilize; no model to apply")
        return self.model_.transform(check_elements(X, self.n_features_in_))
