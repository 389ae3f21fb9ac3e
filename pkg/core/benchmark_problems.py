"""
Built-in linear benchmark problems with closed-form solutions, plus the Robertson
kinetics written as a nonlinear production-destruction system.

Each linear problem carries the calibration data used by the divergence
experiments: the dominant eigenvalue, a stable and an unstable target z, and
the perturbation direction of the start value y* + eps*v.
"""

import functools
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from core.dense_linalg import eigenvalues, norm2
from core.errors import ParameterError, UnknownProblemError
from core.pds_core import GeneralPDS, LinearPDS, as_state, kernel_basis, steady_state

# targets for dt * lambda_dominant, stable (inside) and unstable (outside) for SSPMPRK2(0.2, 3)
Z1 = 2.0 * (-6.0 + 1.0j)
Z2 = (11.0 / 6.0) * (-6.0 + 1.0j)
Z3 = -12.5 + 0.0j
Z4 = -11.5 + 0.0j


class TestProblem(NamedTuple):
    __test__ = False

    id: str
    description: str
    system: LinearPDS
    y0: np.ndarray
    y_star: np.ndarray
    exact: Optional[Callable[[float], np.ndarray]]
    invariants: List[np.ndarray]
    spectrum: List[complex]
    dominant_eigenvalue: complex
    stable_z: Optional[complex]
    unstable_z: Optional[complex]
    perturbation: np.ndarray

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def kernel(self) -> List[np.ndarray]:
        """Steady-state directions, a basis of ker(A)."""
        return kernel_basis(self.system.A)


def _real3_exact(t: float) -> np.ndarray:
    return (np.array([5.0, 3.0, 7.0])
            + 4.0 * np.exp(-300.0 * t) * np.array([-1.0, 0.0, 1.0])
            - 6.0 * np.exp(-500.0 * t) * np.array([0.0, -1.0, 1.0]))


def _complex3_exact(t: float) -> np.ndarray:
    u = np.array([-1.0, 0.0, 1.0])
    w = np.array([1.0, -1.0, 0.0])
    c, s = np.cos(100.0 * t), np.sin(100.0 * t)
    decay = np.exp(-600.0 * t)
    return (np.array([13.0, 14.0, 10.0])
            - 2.0 * decay * (c * u - s * w)
            - 6.0 * decay * (c * w + s * u))


def _double_kernel4_exact(t: float) -> np.ndarray:
    c1, c2, c3, c4 = 30.0 / 7.0, 5.0 / 3.0, -23.0 / 7.0, 7.0 / 3.0
    return (c1 * np.array([0.0, 1.0, 4.0 / 3.0, 0.0])
            + c2 * np.array([1.0, 0.0, 0.0, 2.0])
            + c3 * np.exp(-700.0 * t) * np.array([0.0, 1.0, -1.0, 0.0])
            + c4 * np.exp(-300.0 * t) * np.array([1.0, 0.0, 0.0, -1.0]))


@functools.lru_cache(maxsize=None)
def _registry() -> Dict[str, TestProblem]:
    ones3 = np.ones(3)
    problems = [
        TestProblem(
            id='real3',
            description='three species, real spectrum {0, -300, -500}',
            system=LinearPDS.from_matrix(100.0 * np.array([[-2.0, 1.0, 1.0],
                                                           [1.0, -4.0, 1.0],
                                                           [1.0, 3.0, -2.0]])),
            y0=np.array([1.0, 9.0, 5.0]),
            y_star=np.array([5.0, 3.0, 7.0]),
            exact=_real3_exact,
            invariants=[ones3],
            spectrum=[0.0, -300.0, -500.0],
            dominant_eigenvalue=-500.0 + 0.0j,
            stable_z=Z4, unstable_z=Z3,
            perturbation=np.array([1.0, -2.0, 1.0]),
        ),
        TestProblem(
            id='complex3',
            description='three species, complex pair 100(-6 +- i)',
            system=LinearPDS.from_matrix(100.0 * np.array([[-4.0, 3.0, 1.0],
                                                           [2.0, -4.0, 3.0],
                                                           [2.0, 1.0, -4.0]])),
            y0=np.array([9.0, 20.0, 8.0]),
            y_star=np.array([13.0, 14.0, 10.0]),
            exact=_complex3_exact,
            invariants=[ones3],
            spectrum=[0.0, 100.0 * (-6.0 + 1.0j), 100.0 * (-6.0 - 1.0j)],
            dominant_eigenvalue=100.0 * (-6.0 + 1.0j),
            stable_z=Z2, unstable_z=Z1,
            perturbation=np.array([1.0, -2.0, 1.0]),
        ),
        TestProblem(
            id='double-kernel4',
            description='four species, two-dimensional kernel, spectrum {0, 0, -300, -700}',
            system=LinearPDS.from_matrix(100.0 * np.array([[-2.0, 0.0, 0.0, 1.0],
                                                           [0.0, -4.0, 3.0, 0.0],
                                                           [0.0, 4.0, -3.0, 0.0],
                                                           [2.0, 0.0, 0.0, -1.0]])),
            y0=np.array([4.0, 1.0, 9.0, 1.0]),
            y_star=np.array([35.0, 90.0, 120.0, 70.0]) / 21.0,
            exact=_double_kernel4_exact,
            invariants=[np.ones(4), np.array([1.0, 2.0, 2.0, 1.0])],
            spectrum=[0.0, 0.0, -300.0, -700.0],
            dominant_eigenvalue=-700.0 + 0.0j,
            stable_z=Z4, unstable_z=Z3,
            perturbation=np.array([1.0, -1.0, 1.0, -1.0]),
        ),
    ]
    return {p.id: p for p in problems}


def problem_ids() -> List[str]:
    return list(_registry())


def get_problem(problem_id: str) -> TestProblem:
    """Look up a built-in problem by id (real3, complex3, double-kernel4)."""
    try:
        return _registry()[problem_id]
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {problem_id!r}; available: {', '.join(problem_ids())}") from None


def exact_solution(problem: Union[str, TestProblem], t: float) -> np.ndarray:
    """Closed-form solution at time t >= 0."""
    if isinstance(problem, str):
        problem = get_problem(problem)
    if t < 0:
        raise ParameterError(f"time must be nonnegative, got {t:g}")
    if problem.exact is None:
        raise ParameterError(f"problem {problem.id!r} has no closed-form solution")
    return problem.exact(float(t))


def _project_out(v: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    # two Gram-Schmidt passes
    for _ in range(2):
        for q in basis:
            v = v - (q @ v) * q
    return v


def orthogonal_direction(invariants: Sequence[np.ndarray], n: int) -> np.ndarray:
    """
    Unit vector orthogonal to every invariant, so that y* + m*v keeps the invariant
    values. Tries (1, -1, 1, ...) first, then the unit vectors; returns zeros when
    the invariants span the whole space.
    """
    basis = []
    for inv in invariants:
        w = _project_out(np.asarray(inv, dtype=float), basis)
        if norm2(w) > 1e-12 * norm2(inv):
            basis.append(w / norm2(w))

    alternating = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    for start in [alternating] + list(np.eye(n)):
        v = _project_out(start, basis)
        if norm2(v) > 1e-8 * norm2(start):
            return v / norm2(v)
    return np.zeros(n)


def matrix_problem(A, y0, problem_id: str = 'matrix') -> TestProblem:
    """
    Test problem for a user-supplied Metzler, conservative matrix.

    y* comes from steady_state and the invariants from linear_invariants. There is
    no closed-form solution and there are no calibration targets, so order studies
    and the default divergence demo are unavailable.
    """
    system = LinearPDS.from_matrix(A)
    y0 = as_state(y0, system.n)
    spectrum = eigenvalues(system.A)
    invariants = list(system.invariant_basis)
    return TestProblem(
        id=problem_id,
        description=f"user matrix of dimension {system.n}",
        system=system,
        y0=y0,
        y_star=steady_state(system, y0),
        exact=None,
        invariants=invariants,
        spectrum=spectrum,
        dominant_eigenvalue=complex(max(spectrum, key=abs)),
        stable_z=None, unstable_z=None,
        perturbation=orthogonal_direction(invariants, system.n),
    )


# Robertson kinetics: A -> B (0.04), B + C -> A + C (1e4), 2B -> B + C (3e7)
ROBERTSON_RATES = (0.04, 1e4, 3e7)
ROBERTSON_Y0 = np.array([1.0 - 2e-12, 1e-12, 1e-12])


def robertson_pds(rates=ROBERTSON_RATES) -> GeneralPDS:
    """Stiff nonlinear conservative PDS; p_ij is the flux from species j into i."""
    k1, k2, k3 = rates

    def production(y):
        p = np.zeros((3, 3))
        p[0, 1] = k2 * y[1] * y[2]
        p[1, 0] = k1 * y[0]
        p[2, 1] = k3 * y[1] * y[1]
        return p

    return GeneralPDS(3, production, name='robertson')
