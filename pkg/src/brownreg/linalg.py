"""Dense complex linear algebra: spectra, singular values, traces and star-word moments.

Matrices are plain ``numpy`` complex arrays; :func:`brownreg.validation.check_matrix`
enforces the square/finite contract at every entry point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .exceptions import DecompositionError, UsageError
from .validation import check_matrix

PLAIN = "plain"
STAR = "star"

_LETTER_ALIASES = {"plain": PLAIN, "1": PLAIN, "a": PLAIN, "star": STAR, "*": STAR}


@dataclass(frozen=True)
class StarWord:
    """Finite word in ``{plain, star}``; ``star`` stands for the conjugate transpose."""

    letters: tuple[str, ...]

    def __post_init__(self):
        if len(self.letters) == 0:
            raise UsageError("a star word must be nonempty")
        try:
            norm = tuple(_LETTER_ALIASES[str(s).lower()] for s in self.letters)
        except KeyError as exc:
            raise UsageError(f"unknown star-word letter {exc.args[0]!r}") from None
        object.__setattr__(self, "letters", norm)

    @classmethod
    def parse(cls, text: str) -> "StarWord":
        """Parse a compact form such as ``"1*1*"`` or ``"plain,star"``."""
        text = text.strip()
        if "," in text:
            return cls(tuple(p.strip() for p in text.split(",") if p.strip()))
        return cls(tuple(text))

    def __mul__(self, k: int) -> "StarWord":
        return StarWord(self.letters * k)

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class SpectrumSample:
    kind: str  # "eigenvalues" or "singular_values"
    values: np.ndarray
    source_n: int
    trial_id: int = 0
    seed_info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("eigenvalues", "singular_values"):
            raise UsageError(f"unknown spectrum kind {self.kind!r}")
        if len(self.values) != self.source_n:
            raise UsageError("spectrum length must equal the matrix dimension")


def normalized_trace(a) -> complex:
    a = check_matrix(a)
    return complex(np.trace(a) / a.shape[0])


def _svdvals(a: np.ndarray) -> np.ndarray:
    try:
        s = scipy.linalg.svdvals(a, check_finite=False)
    except np.linalg.LinAlgError as exc:
        try:
            # gesvd is slower but converges in cases where gesdd does not
            s = scipy.linalg.svd(a, compute_uv=False, lapack_driver="gesvd", check_finite=False)
        except np.linalg.LinAlgError:
            raise DecompositionError(f"singular value decomposition failed: {exc}") from exc
    return s


def singular_values(a, *, trial_id=0, seed_info=None) -> SpectrumSample:
    """Singular values of ``a`` in descending order."""
    a = check_matrix(a)
    s = _svdvals(a)
    return SpectrumSample("singular_values", s, a.shape[0], trial_id, dict(seed_info or {}))


def eigenvalues(a, *, trial_id=0, seed_info=None) -> SpectrumSample:
    """Eigenvalues of ``a`` counted with multiplicity, in no particular order."""
    a = check_matrix(a)
    try:
        w = scipy.linalg.eigvals(a, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigenvalue decomposition failed: {exc}") from exc
    return SpectrumSample("eigenvalues", w.astype(np.complex128), a.shape[0], trial_id,
                          dict(seed_info or {}))


def word_moment(a, w: StarWord | Sequence[str] | str) -> complex:
    """Normalized trace of ``a^{s_1} ... a^{s_n}`` for the star word ``w``."""
    a = check_matrix(a)
    if isinstance(w, str):
        w = StarWord.parse(w)
    elif not isinstance(w, StarWord):
        w = StarWord(tuple(w))
    a_star = a.conj().T
    prod = None
    for letter in w.letters:
        factor = a if letter == PLAIN else a_star
        prod = factor if prod is None else prod @ factor
    return complex(np.trace(prod) / a.shape[0])


def frobenius_moment(a) -> float:
    """``(1/n) * sum |a_ij|^2``; equals ``word_moment(a, (plain, star))``."""
    a = check_matrix(a)
    return float(np.sum(a.real**2 + a.imag**2) / a.shape[0])


def operator_norm(a) -> float:
    return float(_svdvals(check_matrix(a))[0])
