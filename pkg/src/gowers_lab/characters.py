"""Real primitive Dirichlet characters through the Kronecker symbol."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arith import is_squarefree
from .errors import InvalidArgument, InvalidConductor, ResourceError

DEFAULT_BUDGET = 5 * 10**7


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a|n) for arbitrary integers."""
    a, n = int(a), int(n)
    if n == 0:
        return 1 if abs(a) == 1 else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -sign
    v = (n & -n).bit_length() - 1
    if v:
        if a % 2 == 0:
            return 0
        n >>= v
        if v % 2 == 1 and a % 8 in (3, 5):
            sign = -sign
    # Jacobi symbol (a|n), n odd positive
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """n -> kronecker(D, n) for a fundamental discriminant D with |D| = modulus."""

    modulus: int
    discriminant: int
    table: np.ndarray = field(repr=False)

    def __call__(self, n):
        if isinstance(n, (int, np.integer)):
            return int(self.table[int(n) % self.modulus])
        return self.table[np.asarray(n, dtype=np.int64) % self.modulus]

    @property
    def is_principal(self) -> bool:
        return self.modulus == 1

    def values(self) -> np.ndarray:
        """Values on Z/qZ as float64, index a <-> residue a."""
        return self.table.astype(np.float64)


def _fundamental_discriminant(q: int, sign: int | None) -> int:
    if q == 1:
        return 1
    if q % 2 == 1:
        if not is_squarefree(q):
            raise InvalidConductor(f"q={q}: odd conductor must be squarefree")
        return q if q % 4 == 1 else -q
    if q % 8 == 4:
        m = q // 4
        if not is_squarefree(m):
            raise InvalidConductor(f"q={q}: q/4={m} is not squarefree")
        return -q if m % 4 == 1 else q
    if q % 16 == 8:
        m = q // 8
        if not is_squarefree(m):
            raise InvalidConductor(f"q={q}: q/8={m} is not squarefree")
        return -q if sign == -1 else q
    if q % 4 == 2:
        raise InvalidConductor(f"q={q}: no primitive real character has conductor 2 mod 4")
    raise InvalidConductor(f"q={q}: 16 divides q, not of shape m, 4m or 8m with m squarefree")


def make_real_character(q: int, sign: int | None = None) -> DirichletCharacter:
    """Primitive real character of conductor q.

    For q = 8m both D = 8m and D = -8m are fundamental; ``sign=-1`` picks the
    odd one, otherwise D = +8m.
    """
    q = int(q)
    if q < 1:
        raise InvalidConductor(f"q={q}: conductor must be positive")
    D = _fundamental_discriminant(q, sign)
    table = np.array([kronecker_symbol(D, a) for a in range(q)], dtype=np.int8)
    table.setflags(write=False)
    return DirichletCharacter(modulus=q, discriminant=D, table=table)


def char_gowers_norm(chi: DirichletCharacter, k: int, budget: int = DEFAULT_BUDGET) -> float:
    """Normalized U^k(Z/qZ) norm of chi."""
    from .gowers import raised_group_fast

    if k < 1:
        raise InvalidArgument("k must be >= 1")
    q = chi.modulus
    if q == 1:
        return 1.0
    if k > 2 and q ** (k + 1) > budget:
        raise ResourceError(
            f"q^(k+1) = {q}^{k + 1} exceeds budget {budget}; the k=2 Fourier path has no such limit")
    raised = raised_group_fast(chi.values(), k)
    return max(raised, 0.0) ** (1.0 / 2**k)
