"""The spinorial layer of a finite system.

Wave functions live in the spin spaces of the points; the relational object
between two points is the kernel map obtained by projecting one operator onto
the image of the other.  From it derive the closed chain, the proper
timelike relation, sign operators, the spin connection, splice maps between
Clifford subspaces, holonomy around triangles, and the induced metric
connection on tangent-space representatives.

All operators on a spin space are given as matrices in the eigenbasis of the
base point, where the spin Gram matrix is diagonal.  Adjoints are always
taken with respect to the indefinite spin scalar products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import CausalFermionSystem, SpinSpace, Tolerances
from .errors import NotSpinConnectableError, SpliceError, ValidationError

__all__ = [
    "CliffordSubspace",
    "ClosedChain",
    "KernelMap",
    "SignOperator",
    "SpinConnection",
    "closed_chain",
    "compose_transport",
    "directional_sign",
    "euclidean_sign",
    "grassmann_residual",
    "holonomy",
    "kernel",
    "metric_connection",
    "physical_wave_function",
    "properly_timelike",
    "spin_adjoint",
    "spin_connectable",
    "spin_connection",
    "splice_map",
    "verify_clifford",
]

#: Default connection phase, the upper end of the admissible upper range.
PHI_DEFAULT = 0.75 * math.pi

#: Admissible (open) phase ranges for the connection.
PHI_RANGES = (
    (0.5 * math.pi, 0.75 * math.pi),
    (-0.75 * math.pi, -0.5 * math.pi),
)


# ---------------------------------------------------------------------------
# kernels and wave functions


@dataclass(frozen=True)
class KernelMap:
    """Projection kernel from the spin space at ``y`` to the one at ``x``."""

    x_id: str
    y_id: str
    matrix: np.ndarray


def physical_wave_function(system: CausalFermionSystem, u) -> dict:
    """Project a Hilbert vector onto every spin space.

    Returns a dict mapping point id to the coordinate vector of the
    orthogonal projection in that point's spin basis.
    """
    u = np.asarray(u, dtype=np.complex128)
    if np.linalg.norm(u) == 0:
        raise ValidationError("the zero vector has no wave function")
    return {e.id: e.op.spin_space().project(u) for e in system.points}


def kernel(system: CausalFermionSystem, x_id: str, y_id: str) -> KernelMap:
    """Kernel map P(x, y): matrix of ``pi_x  y`` restricted to the image of y."""
    x = system.point(x_id)
    y = system.point(y_id)
    g = x.image_basis().conj().T @ y.image_basis()
    return KernelMap(x_id, y_id, g * y.nonzero_eigenvalues()[None, :])


def spin_adjoint(matrix, gram_from, gram_to) -> np.ndarray:
    """Adjoint of a map between spin spaces w.r.t. the spin scalar products.

    ``matrix`` maps (S_from, gram_from) to (S_to, gram_to); both Gram matrices
    are given as diagonal vectors.  The adjoint maps back.
    """
    gf = np.asarray(gram_from, dtype=np.float64)
    gt = np.asarray(gram_to, dtype=np.float64)
    return (matrix.conj().T * gt[None, :]) / gf[:, None]


# ---------------------------------------------------------------------------
# closed chain and its spectral splitting


@dataclass(frozen=True)
class ChainCluster:
    """One eigenvalue cluster of a closed chain.

    ``sign`` is +1 / -1 for a positive / negative definite eigenspace and 0
    when the eigenspace is indefinite, degenerate, or defective.
    """

    value: complex
    vectors: np.ndarray
    gram_form: np.ndarray
    sign: int

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class ClosedChain:
    """The chain A_xy = P(x,y) P(y,x) on the spin space at ``x``."""

    x_id: str
    y_id: str
    matrix: np.ndarray
    eigenvalues: np.ndarray
    clusters: tuple[ChainCluster, ...]

    @property
    def definite(self) -> bool:
        return all(c.sign != 0 for c in self.clusters)


def _cluster_spectrum(a, gram_diag, tol: Tolerances):
    """Eigenvalue clusters of a Gram-symmetric matrix, with definiteness."""
    w, v = np.linalg.eig(a)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = v[:, order]
    scale = np.abs(w).max(initial=0.0)
    ctol = max(tol.eig_rel, 1e-8) * max(scale, 1e-300)

    clusters = []
    start = 0
    for k in range(1, len(w) + 1):
        if k == len(w) or abs(w[k] - w[start]) > ctol:
            vc = v[:, start:k]
            m = vc.conj().T @ (gram_diag[:, None] * vc)
            m = 0.5 * (m + m.conj().T)
            mu = np.linalg.eigvalsh(m)
            dtol = 1e-10 * max(1.0, np.abs(mu).max(initial=0.0))
            if mu.min() > dtol:
                sign = 1
            elif mu.max() < -dtol:
                sign = -1
            else:
                sign = 0
            clusters.append(
                ChainCluster(
                    value=complex(np.mean(w[start:k])),
                    vectors=vc,
                    gram_form=m,
                    sign=sign,
                )
            )
            start = k
    return w, tuple(clusters)


def closed_chain(system: CausalFermionSystem, x_id: str, y_id: str) -> ClosedChain:
    """Closed chain of the pair, with eigenspace definiteness per cluster."""
    p_xy = kernel(system, x_id, y_id).matrix
    p_yx = kernel(system, y_id, x_id).matrix
    a = p_xy @ p_yx
    gram = system.spin_space(x_id).gram_diag
    w, clusters = _cluster_spectrum(a, gram, system.tolerances)
    return ClosedChain(x_id, y_id, a, w, clusters)


def properly_timelike(
    system: CausalFermionSystem, x_id: str, y_id: str, tol: Tolerances | None = None
) -> bool:
    """True iff the closed chain has a strictly positive spectrum and every
    eigenspace is definite for the spin scalar product."""
    tol = tol or system.tolerances
    chain = closed_chain(system, x_id, y_id)
    w = chain.eigenvalues
    scale = np.abs(w).max(initial=0.0)
    if scale == 0.0:
        return False
    if np.any(np.abs(w.imag) > tol.imag_rel * scale):
        return False
    if np.any(w.real <= tol.zero_abs * scale):
        return False
    return chain.definite


# ---------------------------------------------------------------------------
# sign operators


@dataclass(frozen=True)
class SignOperator:
    """An involution on a spin space from a spectral splitting."""

    kind: str
    base_id: str
    matrix: np.ndarray


def euclidean_sign(system: CausalFermionSystem, x_id: str) -> SignOperator:
    """Sign operator of the splitting into the spectral subspaces of ``-x``.

    +1 on the negative eigenvectors of ``x``, -1 on the positive ones; in the
    descending eigenbasis used here the matrix is diagonal.
    """
    x = system.point(x_id)
    if not x.is_regular(system.n):
        raise ValidationError(f"point {x_id!r} is singular")
    diag = np.concatenate([-np.ones(x.pos_eigs), np.ones(x.neg_eigs)])
    return SignOperator("euclidean", x_id, np.diag(diag).astype(np.complex128))


def directional_sign(
    system: CausalFermionSystem, x_id: str, y_id: str, tol: Tolerances | None = None
) -> SignOperator:
    """Sign operator of the definite splitting of the closed chain.

    Requires the positive and negative definite eigenspaces of A_xy to have
    dimension ``n`` each; otherwise the pair is not spin-connectable.
    """
    tol = tol or system.tolerances
    if not properly_timelike(system, x_id, y_id, tol):
        raise NotSpinConnectableError(
            f"pair ({x_id}, {y_id}) is not properly timelike separated"
        )
    chain = closed_chain(system, x_id, y_id)
    gram = system.spin_space(x_id).gram_diag
    v = _sign_from_clusters(chain, gram, system.n)
    return SignOperator("directional", x_id, v)


def _sign_from_clusters(chain: ClosedChain, gram_diag, n: int) -> np.ndarray:
    dims = {1: 0, -1: 0}
    for c in chain.clusters:
        if c.sign == 0:
            raise NotSpinConnectableError(
                f"indefinite chain eigenspace for pair ({chain.x_id}, {chain.y_id})"
            )
        dims[c.sign] += c.dim
    if dims[1] != n or dims[-1] != n:
        raise NotSpinConnectableError(
            f"definite splitting has dimensions ({dims[1]},{dims[-1]}), "
            f"expected ({n},{n})"
        )
    v = np.zeros_like(chain.matrix)
    for c in chain.clusters:
        proj = c.vectors @ np.linalg.solve(c.gram_form, c.vectors.conj().T * gram_diag[None, :])
        v += c.sign * proj
    return v


def _chain_function(chain: ClosedChain, gram_diag, func) -> np.ndarray:
    """Functional calculus on the (definite, diagonalizable) closed chain."""
    out = np.zeros_like(chain.matrix)
    for c in chain.clusters:
        if c.sign == 0:
            raise NotSpinConnectableError(
                f"indefinite chain eigenspace for pair ({chain.x_id}, {chain.y_id})"
            )
        proj = c.vectors @ np.linalg.solve(c.gram_form, c.vectors.conj().T * gram_diag[None, :])
        out += func(c.value) * proj
    return out


# ---------------------------------------------------------------------------
# Clifford subspaces


@dataclass(frozen=True)
class CliffordSubspace:
    """A space of spin-symmetric operators with scalar anticommutators.

    ``metric`` holds the induced bilinear form in the generator basis;
    ``signature`` its inertia.
    """

    generators: tuple
    metric: np.ndarray
    signature: tuple[int, int]
    base_id: str | None = None

    @property
    def dim(self) -> int:
        return len(self.generators)


def _anticommutator_scalar(u, v):
    """Coefficient c with {u, v} = 2 c * identity, plus the residual matrix."""
    anti = u @ v + v @ u
    r = anti.shape[0]
    c = np.trace(anti) / (2.0 * r)
    return c, anti - 2.0 * c * np.eye(r)


def verify_clifford(
    generators,
    spin_sp: SpinSpace,
    tol: float = 1e-9,
    base_id: str | None = None,
) -> CliffordSubspace:
    """Check the Clifford conditions and build the subspace.

    Every generator must be symmetric for the spin scalar product, pairwise
    anticommutators must be real multiples of the identity within ``tol``
    (relative to the generator scales), and the induced bilinear form must be
    nondegenerate.

    Raises
    ------
    ValidationError
        On a non-symmetric generator, a non-scalar anticommutator, or a
        degenerate form.
    """
    gens = tuple(np.asarray(g, dtype=np.complex128) for g in generators)
    if not gens:
        raise ValidationError("a Clifford subspace needs at least one generator")
    gd = spin_sp.gram_diag
    k = len(gens)
    metric = np.zeros((k, k))
    for i, g in enumerate(gens):
        sym_defect = np.linalg.norm(gd[:, None] * g - (gd[:, None] * g).conj().T)
        if sym_defect > tol * max(1.0, np.linalg.norm(g)):
            raise ValidationError(
                f"generator {i} is not symmetric for the spin scalar product "
                f"(defect {sym_defect:.3e})"
            )
    for i in range(k):
        for j in range(i, k):
            c, resid = _anticommutator_scalar(gens[i], gens[j])
            scale = max(np.linalg.norm(gens[i]) * np.linalg.norm(gens[j]), 1.0)
            if np.linalg.norm(resid) > tol * scale or abs(c.imag) > tol * scale:
                raise ValidationError(
                    f"anticommutator of generators {i}, {j} is not a real "
                    f"multiple of the identity"
                )
            metric[i, j] = metric[j, i] = c.real
    mu = np.linalg.eigvalsh(metric)
    if np.abs(mu).min() <= tol * max(1.0, np.abs(mu).max()):
        raise ValidationError("the induced bilinear form is degenerate")
    signature = (int(np.count_nonzero(mu > 0)), int(np.count_nonzero(mu < 0)))
    return CliffordSubspace(gens, metric, signature, base_id)


def _subspace_frame(subspace: CliffordSubspace) -> np.ndarray:
    """Euclidean-orthonormal basis of the vectorized generator span."""
    mat = np.stack([g.ravel() for g in subspace.generators], axis=1)
    q, r = np.linalg.qr(mat)
    if np.abs(np.diag(r)).min() < 1e-12 * np.abs(np.diag(r)).max():
        raise ValidationError("generators are linearly dependent")
    return q


def grassmann_residual(k1: CliffordSubspace, k2: CliffordSubspace) -> float:
    """Sine of the largest principal angle between the generator spans."""
    angles = scipy.linalg.subspace_angles(_subspace_frame(k1), _subspace_frame(k2))
    return float(np.sin(angles).max(initial=0.0))


def _eta_frame(subspace: CliffordSubspace):
    """Pseudo-orthonormal generator frame, positives first.

    Pivoted Gram-Schmidt in the induced bilinear form; the pivot choice
    depends only on form values, so the construction commutes with unitary
    conjugation of the whole subspace.
    """

    def form(u, v):
        c, _ = _anticommutator_scalar(u, v)
        return c.real

    remaining = list(subspace.generators)
    frame, signs = [], []
    while remaining:
        candidates = []
        for g in remaining:
            h = g.copy()
            for e, s in zip(frame, signs):
                h = h - (form(h, e) / s) * e
            candidates.append((h, form(h, h)))
        best = max(range(len(candidates)), key=lambda i: abs(candidates[i][1]))
        h, q = candidates[best]
        if abs(q) < 1e-10:
            raise SpliceError("degenerate direction while building the frame")
        frame.append(h / math.sqrt(abs(q)))
        signs.append(1.0 if q > 0 else -1.0)
        del remaining[best]
    order = sorted(range(len(frame)), key=lambda i: (-signs[i], i))
    return [frame[i] for i in order], [signs[i] for i in order]


def splice_map(
    spin_sp: SpinSpace,
    k_from: CliffordSubspace,
    k_to: CliffordSubspace,
    tol: float = 1e-8,
) -> np.ndarray:
    """Unitary on the spin space conjugating one Clifford subspace to another.

    Pseudo-orthonormal frames of both subspaces are aligned: the returned U
    satisfies ``b_i = U a_i U^{-1}`` for the matched frames, is unitary for
    the spin scalar product, and its global phase is fixed by making the
    largest-modulus entry real positive.

    Raises
    ------
    SpliceError
        On signature mismatch, a non-unique intertwiner, or when no
        Krein-unitary intertwiner exists within ``tol``.
    """
    if k_from.signature != k_to.signature:
        raise SpliceError(
            f"signature mismatch {k_from.signature} vs {k_to.signature}"
        )
    frame_a, signs_a = _eta_frame(k_from)
    frame_b, signs_b = _eta_frame(k_to)
    if signs_a != signs_b:
        raise SpliceError("frame sign patterns disagree")

    r = frame_a[0].shape[0]
    eye = np.eye(r)
    rows = [np.kron(eye, b) - np.kron(a.T, eye) for a, b in zip(frame_a, frame_b)]
    stacked = np.concatenate(rows, axis=0)
    _, sing, vh = np.linalg.svd(stacked)
    scale = max(sing.max(initial=0.0), 1.0)
    null_rows = vh[sing <= tol * scale] if sing.size else vh[-1:]
    if null_rows.shape[0] == 0:
        raise SpliceError(
            f"no intertwiner: smallest residual {sing[-1]:.3e} exceeds tolerance"
        )
    # when the frames do not generate the full algebra the intertwiner space
    # is degenerate; the element closest to the identity is the convention
    basis = null_rows.conj().T
    vec_eye = eye.ravel(order="F").astype(np.complex128)
    coeff = basis.conj().T @ vec_eye
    u_vec = basis @ coeff
    if np.linalg.norm(u_vec) < 1e-8:
        u_vec = basis[:, -1]
    u = u_vec.reshape(r, r, order="F")

    gd = spin_sp.gram_diag
    uu = spin_adjoint(u, gd, gd) @ u
    c = np.trace(uu) / r
    if np.linalg.norm(uu - c * eye) > 1e-8 * max(abs(c), 1.0) * r:
        raise SpliceError("intertwiner is not Krein-normalizable")
    if c.real <= 0 or abs(c.imag) > 1e-8 * abs(c):
        raise SpliceError("no Krein-unitary intertwiner (negative normalization)")
    u = u / math.sqrt(c.real)

    idx = np.unravel_index(np.argmax(np.abs(u)), u.shape)
    phase = u[idx] / abs(u[idx])
    return u * np.conj(phase)


# ---------------------------------------------------------------------------
# spin connection


@dataclass(frozen=True)
class SpinConnection:
    """Unitary connection from the spin space at ``y`` to the one at ``x``."""

    x_id: str
    y_id: str
    phi: float | None
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)


def spin_connectable(
    system: CausalFermionSystem, x_id: str, y_id: str, tol: Tolerances | None = None
) -> bool:
    """Working criterion: properly timelike both ways with (n, n)-definite
    chain splittings on both sides."""
    if x_id == y_id:
        return True
    try:
        directional_sign(system, x_id, y_id, tol)
        directional_sign(system, y_id, x_id, tol)
    except NotSpinConnectableError:
        return False
    return True


def _connection_matrix(system, x_id, y_id, phi):
    chain = closed_chain(system, x_id, y_id)
    w = chain.eigenvalues
    scale = np.abs(w).max(initial=0.0)
    tol = system.tolerances
    if scale == 0.0 or np.any(w.real <= tol.zero_abs * scale) or np.any(
        np.abs(w.imag) > tol.imag_rel * scale
    ):
        raise NotSpinConnectableError(
            f"closed chain of ({x_id}, {y_id}) has non-positive spectrum: {w}"
        )
    gram = system.spin_space(x_id).gram_diag
    v = _sign_from_clusters(chain, gram, system.n)
    inv_half = _chain_function(chain, gram, lambda lam: 1.0 / math.sqrt(lam.real))
    p = kernel(system, x_id, y_id).matrix
    r = v.shape[0]
    rot = math.cos(phi) * np.eye(r) + 1j * math.sin(phi) * v
    return rot @ inv_half @ p, v


def _condition_residual(system, x_id, y_id, phi, k_xy, k_yx):
    """Grassmann mismatch of the hint subspaces under the candidate map."""
    d, _ = _connection_matrix(system, x_id, y_id, phi)
    gx = system.spin_space(x_id).gram_diag
    gy = system.spin_space(y_id).gram_diag
    d_inv = spin_adjoint(d, gy, gx)
    mapped = tuple(d_inv @ g @ d for g in k_xy.generators)
    mapped_sub = CliffordSubspace(mapped, k_xy.metric, k_xy.signature, y_id)
    return grassmann_residual(mapped_sub, k_yx)


def _scan_phi(system, x_id, y_id, k_xy, k_yx):
    """Best condition-(ii) phase over both admissible ranges.

    Coarse grid plus golden-section refinement; on a tie the positive range
    wins, keeping reports deterministic.
    """

    def residual(phi):
        return _condition_residual(system, x_id, y_id, phi, k_xy, k_yx)

    best = None
    for lo, hi in PHI_RANGES:
        grid = np.linspace(lo, hi, 41)[1:-1]
        vals = [residual(p) for p in grid]
        k = int(np.argmin(vals))
        a = grid[max(k - 1, 0)]
        b = grid[min(k + 1, len(grid) - 1)]
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        c, d = b - gr * (b - a), a + gr * (b - a)
        fc, fd = residual(c), residual(d)
        for _ in range(40):
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - gr * (b - a)
                fc = residual(c)
            else:
                a, c, fc = c, d, fd
                d = a + gr * (b - a)
                fd = residual(d)
        phi = 0.5 * (a + b)
        res = residual(phi)
        # strict improvement keeps the positive range on exact ties
        if best is None or res < best[1] - 1e-15:
            best = (phi, res)
    return best


def spin_connection(
    system: CausalFermionSystem,
    x_id: str,
    y_id: str,
    clifford_hint=None,
    cond2_tol: float = 1e-6,
) -> SpinConnection:
    """Spin connection D_(x,y) of a spin-connectable pair.

    The unitary has the form ``exp(i phi v) A^(-1/2) P(x,y)`` with the
    directional sign operator ``v`` of the pair.  The phase is chosen as
    follows: with a ``clifford_hint`` pair ``(K_xy, K_yx)`` it minimizes the
    subspace mismatch of the two hints under the connection (scan plus
    golden-section, error if the best residual exceeds ``cond2_tol``);
    otherwise the default ``3 pi / 4`` is used and recorded in the metadata.
    The phase of the reversed pair is the negative, which realizes
    ``D_(y,x) = D_(x,y)^(-1) = D_(x,y)^*`` exactly.

    The degenerate pair ``x == y`` returns the identity: no admissible phase
    is compatible with the inverse property on the diagonal, and triangle
    holonomy must be trivial there.
    """
    if x_id == y_id:
        r = system.point(x_id).rank
        return SpinConnection(
            x_id, y_id, None, np.eye(r, dtype=np.complex128), {"degenerate": True}
        )
    ix, iy = system.index(x_id), system.index(y_id)
    canonical = ix < iy
    a_id, b_id = (x_id, y_id) if canonical else (y_id, x_id)
    hint = clifford_hint if canonical else (
        (clifford_hint[1], clifford_hint[0]) if clifford_hint else None
    )
    if hint is not None:
        phi_abs, residual = _scan_phi(system, a_id, b_id, hint[0], hint[1])
        if residual > cond2_tol:
            raise NotSpinConnectableError(
                f"no admissible phase matches the Clifford hint for "
                f"({x_id}, {y_id}); best residual {residual:.3e}"
            )
        meta = {"phi_source": "hint", "hint_residual": residual}
    else:
        phi_abs = PHI_DEFAULT
        meta = {"phi_source": "default"}
    phi = phi_abs if canonical else -phi_abs
    matrix, v = _connection_matrix(system, x_id, y_id, phi)
    meta["canonical_order"] = canonical
    return SpinConnection(x_id, y_id, phi, matrix, meta)


# ---------------------------------------------------------------------------
# transport, holonomy, metric connection


def compose_transport(
    system: CausalFermionSystem,
    path_ids,
    clifford_provider=None,
    clifford_hints: bool = False,
):
    """Compose spin connections along a discrete path, splicing at the stops.

    ``clifford_provider(a_id, b_id)`` must return the reference Clifford
    subspace at ``a`` for the pair ``(a, b)``; without a provider the splice
    maps are identities (recorded in the segment metadata).

    Returns the composite map from the first to the last spin space together
    with one record per segment.
    """
    path = list(path_ids)
    if len(path) < 2:
        raise ValidationError("a path needs at least two points")
    records = []
    total = None
    for k in range(1, len(path)):
        prev, cur = path[k - 1], path[k]
        hint = None
        if clifford_provider is not None and clifford_hints:
            hint = (clifford_provider(cur, prev), clifford_provider(prev, cur))
        conn = spin_connection(system, cur, prev, clifford_hint=hint)
        g_prev = system.spin_space(prev).gram_diag
        g_cur = system.spin_space(cur).gram_diag
        defect = spin_adjoint(conn.matrix, g_prev, g_cur) @ conn.matrix
        defect -= np.eye(defect.shape[0])
        seg = {
            "from": prev,
            "to": cur,
            "phi": conn.phi,
            "unitarity": float(np.linalg.norm(defect)),
            **conn.metadata,
        }
        if total is None:
            total = conn.matrix
        else:
            if clifford_provider is not None:
                before = path[k - 2]
                u = splice_map(
                    system.spin_space(prev),
                    clifford_provider(prev, before),
                    clifford_provider(prev, cur),
                )
                seg["splice"] = True
            else:
                u = np.eye(total.shape[0], dtype=np.complex128)
                seg["splice"] = False
            total = conn.matrix @ u @ total
        records.append(seg)
    return total, records


def holonomy(
    system: CausalFermionSystem,
    x_id: str,
    y_id: str,
    z_id: str,
    clifford_provider=None,
) -> np.ndarray:
    """Holonomy of the spin connection around the triangle (x, y, z).

    Splice maps reconcile the per-pair reference Clifford subspaces at every
    corner; without a provider they are identities.  The result is a unitary
    on the spin space at ``x``.
    """

    def conn(a, b):
        return spin_connection(system, a, b).matrix

    def splice(at, from_other, to_other):
        if clifford_provider is None:
            r = system.point(at).rank
            return np.eye(r, dtype=np.complex128)
        return splice_map(
            system.spin_space(at),
            clifford_provider(at, from_other),
            clifford_provider(at, to_other),
        )

    return (
        splice(x_id, y_id, z_id)
        @ conn(x_id, y_id)
        @ splice(y_id, z_id, x_id)
        @ conn(y_id, z_id)
        @ splice(z_id, x_id, y_id)
        @ conn(z_id, x_id)
    )


@dataclass(frozen=True)
class MetricTransport:
    """Isometry between tangent-space representatives, in generator bases."""

    x_id: str
    y_id: str
    matrix: np.ndarray
    residuals: dict


def metric_connection(
    system: CausalFermionSystem,
    x_id: str,
    y_id: str,
    t_x: CliffordSubspace,
    t_y: CliffordSubspace,
    k_xy: CliffordSubspace | None = None,
    k_yx: CliffordSubspace | None = None,
    use_hint: bool = False,
    cond2_tol: float = 1e-6,
) -> MetricTransport:
    """Metric connection: splice to the pair subspaces, conjugate with the
    spin connection, splice back to the tangent representatives.

    With ``use_hint`` the connection phase is scanned to best map the pair
    subspaces onto each other (accepting mismatches up to ``cond2_tol``);
    otherwise the default phase is used.  The returned matrix expresses the
    transported generators of ``t_y`` in the generator basis of ``t_x``; the
    residuals record how far the image lies outside the target span and the
    isometry defect of the induced bilinear forms.
    """
    if k_xy is None:
        k_xy = t_x
    if k_yx is None:
        k_yx = t_y
    spin_x = system.spin_space(x_id)
    spin_y = system.spin_space(y_id)
    v_y = splice_map(spin_y, k_from=t_y, k_to=k_yx)
    w_x = splice_map(spin_x, k_from=k_xy, k_to=t_x)
    hint = (k_xy, k_yx) if use_hint and x_id != y_id else None
    d = spin_connection(
        system, x_id, y_id, clifford_hint=hint, cond2_tol=cond2_tol
    ).matrix
    gx, gy = spin_x.gram_diag, spin_y.gram_diag
    d_inv = spin_adjoint(d, gy, gx)
    v_inv = spin_adjoint(v_y, gy, gy)
    w_inv = spin_adjoint(w_x, gx, gx)

    basis = np.stack([g.ravel() for g in t_x.generators], axis=1)
    cols, span_resid, imag_resid = [], 0.0, 0.0
    for g in t_y.generators:
        img = w_x @ (d @ (v_y @ g @ v_inv) @ d_inv) @ w_inv
        coef, res, _, _ = np.linalg.lstsq(basis, img.ravel(), rcond=None)
        recon = basis @ coef
        span_resid = max(
            span_resid,
            float(np.linalg.norm(img.ravel() - recon) / max(np.linalg.norm(img), 1e-300)),
        )
        imag_resid = max(imag_resid, float(np.abs(coef.imag).max(initial=0.0)))
        cols.append(coef.real)
    mat = np.stack(cols, axis=1)
    iso_defect = float(
        np.linalg.norm(mat.T @ t_x.metric @ mat - t_y.metric)
        / max(np.linalg.norm(t_y.metric), 1e-300)
    )
    return MetricTransport(
        x_id,
        y_id,
        mat,
        {"span": span_resid, "imag": imag_resid, "isometry": iso_defect},
    )
