from dataclasses import dataclass, replace

from .exceptions import InputError


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every module.

    ``eps_herm``, ``eps_orth`` and ``eps_eig`` bound Hermitian symmetry
    defects, orthonormality defects and eigen-residuals. ``gap_tol`` is the
    minimal distance between a spectral cutoff and the spectrum. ``eps_doteq``
    is the agreement threshold for maps compared on low spectra.
    """

    eps_herm: float = 1e-9
    eps_orth: float = 1e-9
    eps_eig: float = 1e-9
    gap_tol: float = 1e-6
    eps_doteq: float = 1e-8
    eps_scalar: float = 1e-8
    eps_compat: float = 1e-8
    q_max: int = 64

    def __post_init__(self):
        for name in ("eps_herm", "eps_orth", "eps_eig", "gap_tol", "eps_doteq",
                     "eps_scalar", "eps_compat"):
            if not getattr(self, name) > 0:
                raise InputError(f"tolerance {name} must be positive")
        if self.q_max < 1:
            raise InputError("q_max must be at least 1")

    def with_overrides(self, **kwargs):
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


DEFAULT_TOL = Tolerances()


def resolve(tol):
    return DEFAULT_TOL if tol is None else tol
