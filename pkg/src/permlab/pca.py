"""Principal component analysis of the compounds x membranes matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError


@dataclass(frozen=True)
class PcaModel:
    """Centered PCA: orthonormal loading rows plus explained variance.

    Attributes
    ----------
    column_means : (d,) array
        Per-column means removed before projection.
    components : (k, d) array
        Orthonormal loading rows, strongest direction first.
    singular_values : (k,) array
        Singular values of the centered matrix for the kept components.
    explained_variance_ratio : (k,) array
        sigma_i^2 / sum_j sigma_j^2 over all d singular values.
    n_samples : int
        Rows used in the fit.
    dropped_rows : tuple
        Indices of input rows excluded for containing missing cells.
    """

    column_means: np.ndarray
    components: np.ndarray
    singular_values: np.ndarray
    explained_variance_ratio: np.ndarray
    n_samples: int
    dropped_rows: tuple = ()

    def __post_init__(self):
        C = self.components
        gram = C @ C.T
        if not np.allclose(gram, np.eye(C.shape[0]), atol=1e-10):
            raise DegenerateInputError("component rows are not orthonormal")
        r = self.explained_variance_ratio
        if np.any(np.diff(r) > 1e-12) or np.any(r < -1e-15) or r.sum() > 1 + 1e-12:
            raise DegenerateInputError("invalid explained variance ratios")

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def pca_fit(X: np.ndarray, k: int) -> PcaModel:
    """Fit a centered (unscaled) PCA with k components.

    Rows containing NaN are dropped and reported through
    ``model.dropped_rows``. Component signs are fixed by flipping each row
    so that its largest-magnitude loading is positive.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DegenerateInputError("pca_fit expects a 2D matrix")
    keep = ~np.isnan(X).any(axis=1)
    dropped = tuple(int(i) for i in np.nonzero(~keep)[0])
    X = X[keep]
    n, d = X.shape
    if n < 2:
        raise DegenerateInputError(f"need at least 2 complete rows, have {n}")
    if not (1 <= k <= min(n, d)):
        raise DegenerateInputError(f"k={k} outside [1, min(n={n}, d={d})]")
    means = X.mean(axis=0)
    centered = X - means
    if not np.isfinite(centered).all():
        raise DegenerateInputError("non-finite values in input matrix")
    if np.allclose(centered, 0):
        raise DegenerateInputError("all rows identical, no variance to explain")
    U, s, Vt = np.linalg.svd(centered, full_matrices=False)
    total = float(np.sum(s**2))
    ratios = (s[:k] ** 2) / total
    components = Vt[:k].copy()
    for i in range(k):
        j = int(np.argmax(np.abs(components[i])))
        if components[i, j] < 0:
            components[i] = -components[i]
    return PcaModel(
        column_means=means,
        components=components,
        singular_values=s[:k].copy(),
        explained_variance_ratio=ratios,
        n_samples=n,
        dropped_rows=dropped,
    )


def pca_transform(model: PcaModel, X: np.ndarray) -> np.ndarray:
    """Project rows onto the fitted components: (X - means) @ components.T."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.column_means.shape[0]:
        raise DimensionMismatchError(
            f"matrix has {X.shape[1]} columns, model expects "
            f"{model.column_means.shape[0]}"
        )
    return (X - model.column_means) @ model.components.T
