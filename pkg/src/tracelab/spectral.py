"""Spectral side: section spaces, operator blocks, eigendata, kernels.

Degree-k sections of the k-th power of the polarising line are realised as
homogeneous monomials z^alpha (|alpha| = k) on the sphere; the operator is
the compression of i times the contact field, assembled either by quadrature
(the establishing route: Gram products of the differentiated basis over a
moment-coordinate sphere rule) or analytically (the fast route, valid once
the quadrature route has certified diagonality).  Everything downstream
consumes a `SpectralPackage`: per-degree eigenvalues and eigensections plus
the guaranteed spectral coverage interval.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import CacheError, CoverageError, QuadratureError
from .geometry import ProjectiveModel, contact_field, make_model
from .quadrature import sphere_rule

_CHUNK = 1 << 16


# ----------------------------------------------------------------------------
# section spaces
# ----------------------------------------------------------------------------


def multi_indices(d: int, k: int) -> np.ndarray:
    """All exponent vectors alpha in N^{d+1} with |alpha| = k, lexicographic."""
    if d == 0:
        return np.array([[k]], dtype=np.int64)
    rows = []
    for first in range(k, -1, -1):
        tail = multi_indices(d - 1, k - first)
        block = np.empty((tail.shape[0], d + 1), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = tail
        rows.append(block)
    return np.concatenate(rows, axis=0)


def section_dimension(d: int, k: int) -> int:
    return math.comb(k + d, d)


def monomial_norms(model: ProjectiveModel, k: int) -> np.ndarray:
    """Norms ||z^alpha|| in L^2 of the sphere measure (mass pi^d/d!).

    Closed form ||z^alpha||^2 = pi^d * alpha! / (k+d)!, evaluated in log space
    for stability at large degree.  The quadrature oracle
    `monomial_norms_quadrature` validates this independently.
    """
    alphas = multi_indices(model.dim, k)
    log_sq = (
        model.dim * math.log(math.pi)
        + gammaln(alphas + 1.0).sum(axis=1)
        - gammaln(k + model.dim + 1.0)
    )
    return np.exp(0.5 * log_sq)


def monomial_norms_quadrature(model: ProjectiveModel, k: int) -> np.ndarray:
    """Monomial norms by explicit sphere quadrature (the establishing oracle)."""
    z, w = sphere_rule(model.dim, t_degree=k + 1, phase_degree=1)
    t = np.abs(z) ** 2
    alphas = multi_indices(model.dim, k)
    vals = np.array([(w * np.prod(t**a, axis=1)).sum() for a in alphas])
    return np.sqrt(vals)


@dataclass(frozen=True)
class SectionSpace:
    k: int
    exponents: np.ndarray  # (dim, d+1) int
    norms: np.ndarray  # (dim,)

    @property
    def dim(self) -> int:
        return self.exponents.shape[0]


def section_space(model: ProjectiveModel, k: int) -> SectionSpace:
    return SectionSpace(k=k, exponents=multi_indices(model.dim, k), norms=monomial_norms(model, k))


def monomial_values(exponents: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Values x^alpha for each row alpha; batched over leading axes of x."""
    x = np.asarray(x)
    return np.prod(x[..., None, :] ** exponents, axis=-1)


# ----------------------------------------------------------------------------
# operator assembly
# ----------------------------------------------------------------------------


def toeplitz_matrix(
    model: ProjectiveModel,
    k: int,
    route: str = "quadrature",
    derivative: str = "analytic",
    gram_tol: float = 1e-10,
) -> np.ndarray:
    """Matrix of the compressed contact derivative on degree-k sections.

    route="quadrature" applies i*(contact field) to each basis monomial and
    projects by Gram quadrature over the sphere rule — this is the
    operator-defining route, and it certifies itself by checking that the
    quadrature Gram matrix of the basis is the identity to ``gram_tol``.
    route="analytic" returns the diagonal matrix diag(<alpha, w>) obtained by
    differentiating monomials along the field in closed form; it is only a
    shortcut for what the quadrature route measures.

    derivative="fd" replaces the analytic monomial derivative with a central
    difference along the field (validation fallback).
    """
    space = section_space(model, k)
    if route == "analytic":
        return np.diag((space.exponents @ model.weight_array).astype(float))
    if route != "quadrature":
        raise ValueError(f"unknown route {route!r}")

    z, wq = sphere_rule(model.dim, t_degree=k + 2, phase_degree=k + 2)
    dim = space.dim
    gram = np.zeros((dim, dim), dtype=complex)
    op = np.zeros((dim, dim), dtype=complex)
    for lo in range(0, z.shape[0], _CHUNK):
        zc = z[lo : lo + _CHUNK]
        wc = wq[lo : lo + _CHUNK]
        V = monomial_values(space.exponents, zc)  # (m, dim)
        field = contact_field(model, zc)
        if derivative == "analytic":
            # (field . dF)(z) = F(z) * sum_j alpha_j field_j / z_j  (nodes avoid zeros)
            S = (field / zc) @ space.exponents.T.astype(float)
            D = V * S
        elif derivative == "fd":
            h = 1e-6
            D = (
                monomial_values(space.exponents, zc + h * field)
                - monomial_values(space.exponents, zc - h * field)
            ) / (2.0 * h)
        else:
            raise ValueError(f"unknown derivative mode {derivative!r}")
        Vw = V * wc[:, None]
        gram += Vw.conj().T @ V
        op += Vw.conj().T @ (1j * D)

    scale = np.outer(space.norms, space.norms)
    gram = gram / scale
    op = op / scale
    if np.abs(gram - np.eye(dim)).max() > gram_tol:
        raise QuadratureError(
            f"quadrature under-resolved at k={k}: Gram residual "
            f"{np.abs(gram - np.eye(dim)).max():.2e}"
        )
    herm = np.abs(op - op.conj().T).max()
    if herm > 1e-9:
        raise QuadratureError(f"assembled block not Hermitian at k={k}: residual {herm:.2e}")
    return 0.5 * (op + op.conj().T)


# ----------------------------------------------------------------------------
# spectral packages
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EigenBlock:
    """Eigendata of one degree block.

    ``vectors`` holds eigensection coefficients over the normalised monomial
    basis, one column per eigensection; ``None`` means the identity (the
    analytic route: monomials are already eigensections).
    """

    k: int
    exponents: np.ndarray
    norms: np.ndarray
    eigenvalues: np.ndarray
    vectors: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.exponents.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralPackage:
    """Eigenvalues/eigensections through degree k_max plus coverage metadata.

    ``coverage_max``: every operator eigenvalue strictly below this number is
    guaranteed to appear in ``lambda_all``.  Toy packages (from
    `from_eigenvalues`) carry no blocks and cannot evaluate kernels.
    """

    model: ProjectiveModel | None
    k_max: int | None
    blocks: list | None
    lambda_all: np.ndarray
    coverage_max: float
    route: str = "analytic"

    @staticmethod
    def from_eigenvalues(values, coverage_max: float = np.inf) -> "SpectralPackage":
        """Toy package from a bare eigenvalue list (trace formulas only)."""
        lam = np.sort(np.asarray(values, dtype=float))
        return SpectralPackage(
            model=None, k_max=None, blocks=None, lambda_all=lam, coverage_max=coverage_max
        )

    def counting_density_bound(self) -> float:
        """Measured constant C with #{lambda_j in [L, L+1)} <= C (1+L)^d."""
        d = self.model.dim if self.model is not None else 0
        lam = self.lambda_all
        top = int(np.ceil(self.coverage_max)) if np.isfinite(self.coverage_max) else int(
            np.ceil(lam.max() + 1)
        )
        counts = np.histogram(lam, bins=np.arange(0, top + 1))[0]
        levels = 1.0 + np.arange(0, top)
        return float((counts / levels**d).max())

    def save(self, path) -> None:
        arrays = {"lambda_all": self.lambda_all}
        if self.blocks is not None:
            for b in self.blocks:
                arrays[f"k{b.k}_eigenvalues"] = b.eigenvalues
                arrays[f"k{b.k}_exponents"] = b.exponents
                arrays[f"k{b.k}_norms"] = b.norms
                if b.vectors is not None:
                    arrays[f"k{b.k}_vectors"] = b.vectors
        meta = {
            "weights": list(self.model.weights) if self.model else None,
            "lift_sign": self.model.lift_sign if self.model else None,
            "lift_shift": self.model.lift_shift if self.model else None,
            "k_max": self.k_max,
            "coverage_max": self.coverage_max,
            "route": self.route,
            "format": 1,
        }
        arrays["checksum"] = np.frombuffer(
            bytes.fromhex(_payload_digest(arrays, meta)), dtype=np.uint8
        )
        buf = io.BytesIO()
        np.savez(buf, meta=np.bytes_(json.dumps(meta, sort_keys=True).encode()), **arrays)
        with open(path, "wb") as fh:
            fh.write(buf.getvalue())

    @staticmethod
    def load(path) -> "SpectralPackage":
        try:
            with np.load(path) as data:
                meta = json.loads(bytes(data["meta"]).decode())
                arrays = {k: data[k] for k in data.files if k not in ("meta", "checksum")}
                stored = bytes(data["checksum"]).hex()
        except FileNotFoundError:
            raise
        except Exception as exc:  # zip/CRC/json failures all mean the same thing
            raise CacheError(f"spectral cache unreadable: {exc}") from exc
        if meta.get("format") != 1:
            raise CacheError("spectral cache has an unknown format version")
        if stored != _payload_digest(arrays, meta):
            raise CacheError("spectral cache corrupt: checksum mismatch")
        if meta["weights"] is None:
            return SpectralPackage.from_eigenvalues(arrays["lambda_all"], meta["coverage_max"])
        model = make_model(
            meta["weights"],
            calibration={"lift_sign": meta["lift_sign"], "lift_shift": meta["lift_shift"]},
        )
        blocks = []
        for k in range(meta["k_max"] + 1):
            blocks.append(
                EigenBlock(
                    k=k,
                    exponents=arrays[f"k{k}_exponents"],
                    norms=arrays[f"k{k}_norms"],
                    eigenvalues=arrays[f"k{k}_eigenvalues"],
                    vectors=arrays.get(f"k{k}_vectors"),
                )
            )
        return SpectralPackage(
            model=model,
            k_max=meta["k_max"],
            blocks=blocks,
            lambda_all=arrays["lambda_all"],
            coverage_max=meta["coverage_max"],
            route=meta["route"],
        )


def _payload_digest(arrays: dict, meta: dict) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(meta, sort_keys=True).encode())
    for key in sorted(k for k in arrays if k != "checksum"):
        h.update(key.encode())
        h.update(np.ascontiguousarray(arrays[key]).tobytes())
    return h.hexdigest()


def eigendata(
    model: ProjectiveModel,
    k_max: int,
    route: str = "analytic",
    quadrature_k_limit: int | None = None,
) -> SpectralPackage:
    """Diagonalise every degree block through k_max.

    route="analytic" uses the closed-form diagonal blocks (monomials are
    eigensections with eigenvalue <alpha, w>); route="quadrature" assembles
    and diagonalises each block numerically (dense Hermitian solve), which is
    the establishing oracle but scales poorly — cap it with
    ``quadrature_k_limit`` if needed.
    """
    blocks = []
    lams = []
    for k in range(k_max + 1):
        space = section_space(model, k)
        if route == "analytic" or (quadrature_k_limit is not None and k > quadrature_k_limit):
            vals = (space.exponents @ model.weight_array).astype(float)
            order = np.argsort(vals, kind="stable")
            blocks.append(
                EigenBlock(
                    k=k,
                    exponents=space.exponents[order],
                    norms=space.norms[order],
                    eigenvalues=vals[order],
                    vectors=None,
                )
            )
        elif route == "quadrature":
            mat = toeplitz_matrix(model, k, route="quadrature")
            vals, vecs = np.linalg.eigh(mat)
            blocks.append(
                EigenBlock(
                    k=k,
                    exponents=space.exponents,
                    norms=space.norms,
                    eigenvalues=vals,
                    vectors=vecs,
                )
            )
        else:
            raise ValueError(f"unknown route {route!r}")
        lams.append(blocks[-1].eigenvalues)
    lambda_all = np.sort(np.concatenate(lams))
    coverage = (k_max + 1) * min(model.weights)
    return SpectralPackage(
        model=model,
        k_max=k_max,
        blocks=blocks,
        lambda_all=lambda_all,
        coverage_max=float(coverage),
        route=route,
    )


# ----------------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------------


def evaluate_section(pkg: SpectralPackage, k: int, coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Value of the degree-k section with the given eigenbasis coefficients.

    ``coeffs`` are coordinates in the block's eigensection basis.  The result
    is the CR-function value at sphere points x (batched); it picks up the
    phase e^{i k theta} under the circle action.
    """
    block = _block(pkg, k)
    mono = monomial_values(block.exponents, x) / block.norms
    if block.vectors is not None:
        mono = mono @ block.vectors
    return mono @ np.asarray(coeffs)


def eigensection_values(pkg: SpectralPackage, k: int, x: np.ndarray) -> np.ndarray:
    """Values of every degree-k eigensection at x (batched; last axis = section)."""
    block = _block(pkg, k)
    mono = monomial_values(block.exponents, x) / block.norms
    return mono @ block.vectors if block.vectors is not None else mono


def szego_diagonal(pkg: SpectralPackage, k: int, x: np.ndarray) -> np.ndarray:
    """Diagonal of the degree-k projector kernel, sum_j |Phi_j(x)|^2."""
    vals = eigensection_values(pkg, k, x)
    return (np.abs(vals) ** 2).sum(axis=-1)


def _block(pkg: SpectralPackage, k: int) -> EigenBlock:
    if pkg.blocks is None:
        raise CoverageError("toy package has no eigensections, only eigenvalues")
    if not 0 <= k <= pkg.k_max:
        raise CoverageError(f"degree {k} outside the package range 0..{pkg.k_max}")
    return pkg.blocks[k]
