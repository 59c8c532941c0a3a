"""The two synthetic structural causal models and their counterfactuals.

Both models keep the exogenous draws ``U`` with every generated row, so a
counterfactual ``X_{A<-a'}`` is a plain re-evaluation of the feature
equation at ``(U, a')``. No abduction step is needed, and
``{X_{A<-a'} : a'}`` depends on ``U`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InvalidParameterError, UnsupportedOperationError
from .rng import Rng

__all__ = [
    "SynthRegression",
    "SynthClassification",
    "gen_regression",
    "gen_classification",
    "counterfactual_features",
    "counterfactual_matrices",
]


def _rowwise_matmul(U: np.ndarray, M: np.ndarray) -> np.ndarray:
    # Each output row is computed independently of the others, so a row's value
    # does not depend on which other rows share the call (unlike blocked BLAS).
    return (U[:, :, None] * M[None, :, :]).sum(axis=1)


@dataclass(frozen=True)
class SynthRegression:
    """Scalar-feature regression SCM with a binary protected attribute.

    ``U1, U2 ~ N(0, 1)``, ``A ~ Bernoulli(0.4)``,
    ``X = sin(U1) + cos(A * U2) + A + 0.1`` and
    ``Y = 0.2 X^2 + 1.2 X + 0.2 + eps``.

    ``label_noise`` is the standard deviation of ``eps`` unless
    ``label_noise_is_variance`` is set, in which case it is the variance.
    """

    p_a: float = 0.4
    label_noise: float = 0.6
    label_noise_is_variance: bool = False

    domain = (0, 1)
    n_exogenous = 2
    task = "regression"

    @property
    def label_std(self) -> float:
        return float(np.sqrt(self.label_noise)) if self.label_noise_is_variance else self.label_noise

    def features(self, U: np.ndarray, a) -> np.ndarray:
        U = np.atleast_2d(U)
        a = np.broadcast_to(np.asarray(a, dtype=np.float64), U.shape[:1])
        x = np.sin(U[:, 0]) + np.cos(a * U[:, 1]) + a + 0.1
        return x[:, None]

    def generate(self, n: int, rng: Rng) -> Dataset:
        if n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {n}")
        U = rng.normal(0.0, 1.0, (n, 2))
        A = rng.bernoulli(self.p_a, n)
        eps = rng.normal(0.0, self.label_std, n)
        X = self.features(U, A)
        x = X[:, 0]
        Y = 0.2 * x**2 + 1.2 * x + 0.2 + eps
        return Dataset(X=X, A=A, Y=Y, task="regression", U=U, domain=self.domain)


@dataclass(frozen=True)
class SynthClassification:
    """Multi-class SCM: ``X = (A - 0.5) w_A + U D_U`` and
    ``Y ~ softmax(X**3 W_X + U W_U + E)`` with ``E ~ N(0, sigma_logit^2 I_K)``.

    Build instances with :meth:`sample`, which draws the mixing matrices.
    """

    w_A: np.ndarray
    D_U: np.ndarray
    W_X: np.ndarray
    W_U: np.ndarray
    sigma_logit: float = 0.2
    p_a: float = 0.5
    r: int = 3

    domain = (0, 1)
    task = "classification"

    @property
    def d(self) -> int:
        return self.D_U.shape[0]

    @property
    def K(self) -> int:
        return self.W_X.shape[1]

    @property
    def n_exogenous(self) -> int:
        return self.d

    @classmethod
    def sample(cls, rng: Rng, d: int = 10, K: int = 10, r: int = 3,
               sigma_logit: float = 0.2, max_tries: int = 10) -> "SynthClassification":
        if d < 1 or K < 2 or not 0 <= r <= d:
            raise InvalidParameterError(f"invalid dimensions d={d}, K={K}, r={r}")
        for _ in range(max_tries):
            D_U = np.eye(d) + rng.uniform((d, d)) * 0.2
            if np.linalg.matrix_rank(D_U) == d:
                break
        else:
            raise InvalidParameterError(f"D_U rank deficient after {max_tries} draws")
        W_X = np.eye(d, K) + rng.uniform((d, K)) * 0.2
        W_U = np.eye(d, K) + rng.uniform((d, K)) * 0.2
        w_A = np.zeros(d)
        w_A[:r] = 2.0 + 0.2 * rng.uniform(r)
        return cls(w_A=w_A, D_U=D_U, W_X=W_X, W_U=W_U, sigma_logit=sigma_logit, r=r)

    def features(self, U: np.ndarray, a) -> np.ndarray:
        U = np.atleast_2d(U)
        a = np.broadcast_to(np.asarray(a, dtype=np.float64), U.shape[:1])
        return (a - 0.5)[:, None] * self.w_A[None, :] + _rowwise_matmul(U, self.D_U)

    def logits(self, X: np.ndarray, U: np.ndarray, E: np.ndarray) -> np.ndarray:
        return _rowwise_matmul(X**3, self.W_X) + _rowwise_matmul(U, self.W_U) + E

    def class_probs(self, X, U, E) -> np.ndarray:
        z = self.logits(X, U, E)
        z = z - z.max(axis=1, keepdims=True)
        p = np.exp(z)
        return p / p.sum(axis=1, keepdims=True)

    def generate(self, n: int, rng: Rng) -> Dataset:
        if n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {n}")
        U = rng.normal(0.0, 1.0, (n, self.d))
        A = rng.bernoulli(self.p_a, n)
        E = rng.normal(0.0, self.sigma_logit, (n, self.K))
        X = self.features(U, A)
        Y = rng.categorical(self.class_probs(X, U, E))
        return Dataset(X=X, A=A, Y=Y, task="classification", K=self.K, U=U, E=E,
                       domain=self.domain)


def gen_regression(n: int, rng: Rng, scm: SynthRegression | None = None) -> Dataset:
    return (scm or SynthRegression()).generate(n, rng)


def gen_classification(n: int, scm: SynthClassification, rng: Rng) -> Dataset:
    if not isinstance(scm, SynthClassification):
        raise InvalidParameterError("gen_classification needs a SynthClassification model")
    return scm.generate(n, rng)


def counterfactual_features(scm, u, target_a, sigma_u: float = 0.0, rng: Rng | None = None):
    """Features of one row under ``do(A = target_a)``.

    ``u`` is the row's stored exogenous vector. With ``sigma_u > 0`` the
    equation is evaluated at ``u + N(0, sigma_u^2 I)`` instead.
    """
    if u is None:
        raise UnsupportedOperationError("row has no stored exogenous variables")
    if target_a not in scm.domain:
        raise InvalidParameterError(f"{target_a!r} is not in the attribute domain {scm.domain}")
    u = np.asarray(u, dtype=np.float64).reshape(1, -1)
    if sigma_u > 0:
        u = u + rng.normal(0.0, sigma_u, u.shape)
    return scm.features(u, target_a)[0]


def counterfactual_matrices(scm, U: np.ndarray, sigma_u: float = 0.0, rng: Rng | None = None):
    """Counterfactual feature matrices for every attribute value.

    One noisy exogenous draw ``U + eps`` is shared by all interventions on a
    row. Returns ``(cf, U_tilde)`` where ``cf`` maps each value of the
    attribute domain to an ``(n, d)`` matrix.
    """
    if U is None:
        raise UnsupportedOperationError("dataset has no stored exogenous variables")
    if sigma_u < 0:
        raise InvalidParameterError(f"sigma_u must be non-negative, got {sigma_u}")
    U_tilde = U + rng.normal(0.0, sigma_u, U.shape) if sigma_u > 0 else U
    cf = {a: scm.features(U_tilde, a) for a in scm.domain}
    return cf, U_tilde
