"""Concrete systems from regularized Dirac seas on a flat spatial 3-torus.

The Hilbert space is spanned by the negative-energy plane-wave solutions of
the free Dirac equation with momenta on a finite lattice, orthonormal in the
Cauchy-surface scalar product.  Evaluating the exponentially momentum-damped
waves at a space-time point yields the local correlation operator there; a
finite list of sample points then gives a system of spin dimension two.
Finite convex mixtures of such systems over a shared Hilbert space model
superpositions of geometries.

Conventions: metric signature (+, -, -, -), Dirac representation of the
gamma matrices, torus of spatial period ``2 pi L`` with momenta in ``Z / L``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import CausalFermionSystem, OperatorPoint, Tolerances
from .errors import DimensionMismatchError, ValidationError
from .spin import CliffordSubspace, verify_clifford

__all__ = [
    "GAMMA",
    "MinkowskiConfig",
    "MixtureSpec",
    "ModeSet",
    "build_modes",
    "build_system",
    "dirac_frame",
    "evaluation_matrix",
    "local_correlation",
    "minkowski_interval",
    "mix_systems",
]

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)

_GAMMA0 = np.diag([1.0, 1.0, -1.0, -1.0]).astype(np.complex128)


def _gamma_spatial(i):
    g = np.zeros((4, 4), dtype=np.complex128)
    g[:2, 2:] = _SIGMA[i]
    g[2:, :2] = -_SIGMA[i]
    return g


#: Dirac matrices (gamma^0, gamma^1, gamma^2, gamma^3), Dirac representation.
GAMMA = (_GAMMA0, _gamma_spatial(0), _gamma_spatial(1), _gamma_spatial(2))

_ETA = np.diag([1.0, -1.0, -1.0, -1.0])


def minkowski_interval(a, b) -> float:
    """Lorentzian interval (+,-,-,-) of the coordinate difference ``b - a``."""
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return float(d @ _ETA @ d)


_DAMPING_KERNELS = {
    "exponential": lambda eps, omega: np.exp(-eps * omega),
    "gaussian": lambda eps, omega: np.exp(-0.5 * (eps * omega) ** 2),
}


def gamma_contract(u) -> np.ndarray:
    """Clifford multiplication by a coordinate 4-vector: {g(u),g(v)} = 2 eta(u,v)."""
    u = np.asarray(u, dtype=float)
    return sum((_ETA[j, j] * u[j]) * GAMMA[j] for j in range(4))


@dataclass(frozen=True)
class MinkowskiConfig:
    """Parameters of a regularized Dirac-sea system on the torus.

    mass : rest mass (> 0)
    eps : regularization length; every mode is damped by the chosen kernel
    torus_radius : L; momenta are integer multiples of ``1/L`` per axis
    kmax : momentum cutoff in lattice units per axis
    sample_points : space-time coordinates (t, x1, x2, x3) of the points
    weights : optional per-point measure weights (default 1)
    damping : regularization kernel, ``exponential`` (``exp(-eps omega)``,
        the default) or ``gaussian`` (``exp(-(eps omega)^2 / 2)``)
    max_f : guard on the Hilbert dimension ``2 (2 kmax + 1)^3``
    """

    mass: float = 1.0
    eps: float = 1e-3
    torus_radius: float = 1.0
    kmax: int = 1
    sample_points: tuple = ()
    weights: tuple | None = None
    damping: str = "exponential"
    max_f: int = 1024

    def __post_init__(self):
        if self.mass <= 0 or self.eps <= 0 or self.torus_radius <= 0:
            raise ValidationError("mass, eps, and torus_radius must be positive")
        if self.kmax < 0:
            raise ValidationError("kmax must be nonnegative")
        if self.weights is not None and len(self.weights) != len(self.sample_points):
            raise ValidationError("weights and sample_points lengths differ")
        if self.damping not in _DAMPING_KERNELS:
            raise ValidationError(
                f"unknown damping kernel {self.damping!r}; "
                f"choose from {sorted(_DAMPING_KERNELS)}"
            )
        if self.eps * self.mass > 0.01:
            warnings.warn(
                f"eps * mass = {self.eps * self.mass:.3g} is not small; the "
                "admissible window between regularization and Compton scale "
                "shrinks",
                stacklevel=2,
            )

    @property
    def f(self) -> int:
        return 2 * (2 * self.kmax + 1) ** 3


@dataclass(frozen=True)
class ModeSet:
    """Negative-energy plane-wave modes, orthonormal on the Cauchy surface.

    momenta : (f, 3) physical momenta,
    omegas : (f,) frequencies ``sqrt(|k|^2 + m^2)``,
    amplitudes : (f, 4) spinor amplitudes including the volume normalization,
    so a mode evaluates to ``amplitude * exp(i (k.x + omega t))``.
    """

    mass: float
    torus_radius: float
    momenta: np.ndarray
    spins: np.ndarray
    omegas: np.ndarray
    amplitudes: np.ndarray

    def __len__(self) -> int:
        return self.momenta.shape[0]


def build_modes(config: MinkowskiConfig) -> ModeSet:
    """All negative-energy modes with lattice momenta up to the cutoff.

    Two spin states per momentum; the amplitudes are eigenvectors of the
    one-particle Hamiltonian on the lower branch, normalized so the mode
    Gram matrix in the Cauchy-surface scalar product is exactly the identity.
    """
    if config.f > config.max_f:
        raise ValidationError(
            f"f = {config.f} exceeds the configured maximum {config.max_f}"
        )
    m, el = config.mass, config.torus_radius
    volume = (2.0 * math.pi * el) ** 3
    norm = 1.0 / math.sqrt(2.0 * math.pi * volume)
    rng = range(-config.kmax, config.kmax + 1)
    momenta, spins, omegas, amps = [], [], [], []
    for trip in itertools.product(rng, rng, rng):
        k = np.array(trip, dtype=float) / el
        h = sum(_GAMMA0 @ GAMMA[i + 1] * k[i] for i in range(3)) + m * _GAMMA0
        w, v = np.linalg.eigh(h)
        omega = math.sqrt(float(k @ k) + m * m)
        if abs(w[0] + omega) > 1e-12 * omega or abs(w[1] + omega) > 1e-12 * omega:
            raise ValidationError("lower Dirac branch not found")
        for s in (0, 1):
            momenta.append(k)
            spins.append(s)
            omegas.append(omega)
            amps.append(norm * v[:, s])
    return ModeSet(
        mass=m,
        torus_radius=el,
        momenta=np.array(momenta),
        spins=np.array(spins, dtype=np.int8),
        omegas=np.array(omegas),
        amplitudes=np.array(amps),
    )


def dirac_residual(modes: ModeSet) -> float:
    """Largest residual of the momentum-space Dirac equation on the lower branch.

    Checks ``gamma(p) w = m w`` for the 4-momentum ``p = (-omega, k)`` of each
    mode, i.e. the negative-energy branch.
    """
    worst = 0.0
    eye = np.eye(4, dtype=np.complex128)
    for a in range(len(modes)):
        p4 = np.array([-modes.omegas[a], *modes.momenta[a]])
        op = gamma_contract(p4) - modes.mass * eye
        resid = np.linalg.norm(op @ modes.amplitudes[a]) / np.linalg.norm(
            modes.amplitudes[a]
        )
        worst = max(worst, float(resid))
    return worst


def evaluation_matrix(
    modes: ModeSet, point, eps: float, damping: str = "exponential"
) -> np.ndarray:
    """Damped evaluation of every mode at a space-time point, as a 4 x f matrix."""
    t = float(point[0])
    x = np.asarray(point[1:], dtype=float)
    phases = np.exp(1j * (modes.momenta @ x + modes.omegas * t))
    damp = _DAMPING_KERNELS[damping](eps, modes.omegas)
    return (modes.amplitudes * (phases * damp)[:, None]).T


def local_correlation(
    modes: ModeSet, point, eps: float, damping: str = "exponential"
) -> OperatorPoint:
    """Local correlation operator at a space-time point.

    With the damped evaluation matrix E the operator is ``-E^+ Sigma E``
    where Sigma is the spinor inner-product matrix; it has rank at most four
    with at most two positive and two negative eigenvalues.
    """
    e = evaluation_matrix(modes, point, eps, damping)
    f_mat = -(e.conj().T @ (_GAMMA0 @ e))
    return OperatorPoint(f_mat)


def build_system(
    config: MinkowskiConfig, tolerances: Tolerances | None = None
) -> CausalFermionSystem:
    """System with one point per sample coordinate, spin dimension two.

    Point ids are ``p0000, p0001, ...`` in sample order; the coordinates and
    generator parameters are kept in the metadata so that reports and the
    Clifford-frame constructor can refer back to them.
    """
    if not config.sample_points:
        raise ValidationError("config has no sample points")
    modes = build_modes(config)
    weights = config.weights or tuple(1.0 for _ in config.sample_points)
    points = []
    coords = {}
    for k, (p, w) in enumerate(zip(config.sample_points, weights)):
        pid = f"p{k:04d}"
        points.append((pid, w, local_correlation(modes, p, config.eps, config.damping)))
        coords[pid] = [float(c) for c in p]
    metadata = {
        "generator": "minkowski",
        "mass": config.mass,
        "eps": config.eps,
        "torus_radius": config.torus_radius,
        "kmax": config.kmax,
        "damping": config.damping,
        "coordinates": coords,
    }
    return CausalFermionSystem(2, points, tolerances=tolerances, metadata=metadata)


def modes_for_system(system: CausalFermionSystem) -> ModeSet:
    """Rebuild the mode set of a system generated by :func:`build_system`."""
    md = system.metadata
    if md.get("generator") != "minkowski":
        raise ValidationError("system was not generated from a Minkowski config")
    cfg = MinkowskiConfig(
        mass=md["mass"],
        eps=md["eps"],
        torus_radius=md["torus_radius"],
        kmax=md["kmax"],
        damping=md.get("damping", "exponential"),
        sample_points=((0.0, 0.0, 0.0, 0.0),),
    )
    return build_modes(cfg)


# ---------------------------------------------------------------------------
# distinguished Clifford subspaces


def _minkowski_frame(xi=None):
    """Pseudo-orthonormal coordinate frame, time axis along ``xi`` if timelike."""
    axes = [np.eye(4)[j] for j in range(4)]
    if xi is None:
        return axes
    xi = np.asarray(xi, dtype=float)
    q = float(xi @ _ETA @ xi)
    if q <= 0:
        return axes
    e0 = xi / math.sqrt(q)
    if e0[0] < 0:
        e0 = -e0
    frame = [e0]
    for cand in (axes[1], axes[2], axes[3], axes[0]):
        v = cand.astype(float)
        for e in frame:
            ee = float(e @ _ETA @ e)
            v = v - (float(v @ _ETA @ e) / ee) * e
        vv = float(v @ _ETA @ v)
        if abs(vv) < 1e-12:
            continue
        frame.append(v / math.sqrt(abs(vv)))
        if len(frame) == 4:
            break
    if len(frame) != 4:
        raise ValidationError("could not complete the adapted frame")
    return frame


def dirac_frame(
    system: CausalFermionSystem,
    modes: ModeSet,
    x_id: str,
    y_id: str | None = None,
) -> CliffordSubspace:
    """Distinguished Clifford subspace at a point of a Minkowski system.

    The ambient Dirac matrices, contracted with a pseudo-orthonormal frame
    adapted to the pair's relative direction (time axis along the coordinate
    difference when it is timelike), are pulled back to the spin space
    through the damped evaluation isometry.  The result has signature (1, 3).
    """
    md = system.metadata
    coords = md.get("coordinates")
    if coords is None:
        raise ValidationError("system metadata carries no sample coordinates")
    eps = md["eps"]
    damping = md.get("damping", "exponential")
    p = coords[x_id]
    xi = None
    if y_id is not None and y_id != x_id:
        xi = np.asarray(coords[y_id], dtype=float) - np.asarray(p, dtype=float)
    x = system.point(x_id)
    if not x.is_regular(system.n):
        raise ValidationError(f"point {x_id!r} is singular")
    spin_sp = x.spin_space()
    iota = evaluation_matrix(modes, p, eps, damping) @ spin_sp.basis
    gram_inv = 1.0 / spin_sp.gram_diag
    iota_inv = gram_inv[:, None] * (iota.conj().T @ _GAMMA0)
    gens = tuple(
        iota_inv @ gamma_contract(e) @ iota for e in _minkowski_frame(xi)
    )
    return verify_clifford(gens, spin_sp, tol=1e-7, base_id=x_id)


def clifford_provider(system: CausalFermionSystem, modes: ModeSet | None = None):
    """Pair-indexed Clifford subspace provider for a Minkowski system."""
    if modes is None:
        modes = modes_for_system(system)
    cache: dict = {}

    def provide(a_id: str, b_id: str) -> CliffordSubspace:
        key = (a_id, b_id)
        if key not in cache:
            cache[key] = dirac_frame(system, modes, a_id, b_id)
        return cache[key]

    return provide


# ---------------------------------------------------------------------------
# flat-space transport studies


def spin_transport_deviation(system, modes: ModeSet, path_ids) -> dict:
    """Deviation of the composed spin transport from the identity.

    The spin spaces at the two endpoints are identified through the damped
    evaluation isometries; the deviation is the Frobenius distance of the
    identified composite to the nearest unitary multiple of the identity
    (the physical transport is defined up to a global phase).
    """
    from .spin import compose_transport

    provider = clifford_provider(system, modes)
    total, records = compose_transport(system, path_ids, provider)
    coords = system.metadata["coordinates"]
    eps = system.metadata["eps"]
    damping = system.metadata.get("damping", "exponential")

    def iota(pid):
        sp = system.spin_space(pid)
        return evaluation_matrix(modes, coords[pid], eps, damping) @ sp.basis

    def iota_inv(pid):
        sp = system.spin_space(pid)
        return (1.0 / sp.gram_diag)[:, None] * (iota(pid).conj().T @ _GAMMA0)

    mapped = iota(path_ids[-1]) @ total @ iota_inv(path_ids[0])
    dim = mapped.shape[0]
    dev = math.sqrt(
        max(
            float(np.linalg.norm(mapped)) ** 2
            + dim
            - 2.0 * abs(complex(np.trace(mapped))),
            0.0,
        )
    )
    max_res = max((r["unitarity"] for r in records), default=0.0)
    return {"spin_deviation": dev, "records": records, "max_segment_residual": max_res}


def frame_transport_deviation(
    system, modes: ModeSet, path_ids, cond2_tol: float = 0.2
) -> dict:
    """Deviation of the composed metric transport from the identity.

    Every point carries the standard coordinate frame as its tangent
    representative; segments run through the pair-adapted subspaces with the
    scanned connection phase (desk-scale pairs sit close to the admissible
    phase-range boundary, so the subspace-match residual is accepted up to
    ``cond2_tol`` and reported).  The composite matrix acts on matched frame
    labels, so the identity is the exact flat-space reference.
    """
    from .spin import metric_connection

    comp = np.eye(4)
    worst = 0.0
    for k in range(1, len(path_ids)):
        y_id, x_id = path_ids[k - 1], path_ids[k]
        t_x = dirac_frame(system, modes, x_id)
        t_y = dirac_frame(system, modes, y_id)
        k_xy = dirac_frame(system, modes, x_id, y_id)
        k_yx = dirac_frame(system, modes, y_id, x_id)
        mt = metric_connection(
            system, x_id, y_id, t_x, t_y, k_xy, k_yx,
            use_hint=True, cond2_tol=cond2_tol,
        )
        comp = mt.matrix @ comp
        worst = max(worst, mt.residuals["span"], mt.residuals["isometry"])
    return {
        "frame_deviation": float(np.linalg.norm(comp - np.eye(4))),
        "max_segment_residual": worst,
    }


def transport_study(
    base_config: MinkowskiConfig,
    eps_list,
    refine_list,
    duration: float = 0.6,
) -> list[dict]:
    """Convergence table for transport along a purely timelike geodesic.

    For every regularization length and every segment count, a system is
    built on the equally spaced path points and both the spin and the frame
    transport deviations from the identity are recorded.
    """
    from dataclasses import replace

    rows = []
    for eps in eps_list:
        for n_steps in refine_list:
            pts = tuple(
                (duration * k / n_steps, 0.0, 0.0, 0.0) for k in range(n_steps + 1)
            )
            cfg = replace(base_config, eps=float(eps), sample_points=pts)
            system = build_system(cfg)
            modes = build_modes(cfg)
            path = list(system.ids)
            spin = spin_transport_deviation(system, modes, path)
            frame = frame_transport_deviation(system, modes, path)
            rows.append(
                {
                    "eps": float(eps),
                    "n_steps": int(n_steps),
                    "spin_deviation": spin["spin_deviation"],
                    "frame_deviation": frame["frame_deviation"],
                    "max_segment_residual": max(
                        spin["max_segment_residual"], frame["max_segment_residual"]
                    ),
                }
            )
    return rows


# ---------------------------------------------------------------------------
# mixtures


@dataclass(frozen=True)
class MixtureSpec:
    """A finite convex combination of systems over a shared Hilbert space."""

    systems: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.systems) != len(self.weights) or not self.systems:
            raise ValidationError("systems and weights must match and be nonempty")
        if any(w < 0 for w in self.weights):
            raise ValidationError("mixture weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValidationError("mixture weights must sum to one")


def mix_systems(spec: MixtureSpec) -> CausalFermionSystem:
    """Union of the component point lists with rescaled weights.

    Point ids are prefixed with the component index, so the support of the
    mixture is the disjoint union of the component supports even when the
    same operators occur in several components.
    """
    first = spec.systems[0]
    for s in spec.systems[1:]:
        if (s.n, s.f) != (first.n, first.f):
            raise DimensionMismatchError(
                "mixture components must share spin and Hilbert dimensions"
            )
    points = []
    for k, (s, w) in enumerate(zip(spec.systems, spec.weights)):
        for e in s.points:
            points.append((f"m{k}:{e.id}", w * e.weight, e.op))
    metadata = {
        "generator": "mixture",
        "weights": [float(w) for w in spec.weights],
        "components": [s.metadata for s in spec.systems],
    }
    return CausalFermionSystem(
        first.n, points, tolerances=first.tolerances, metadata=metadata
    )
