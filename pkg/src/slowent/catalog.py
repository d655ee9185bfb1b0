"""Named actions used by the tests, scripts and example configs."""

from __future__ import annotations

from .action import IntegerMatrixAction, verify_action

CAT = ((2, 1), (1, 1))
B_BLOCK = ((3, 1), (2, 1))
# companion matrix of x^3 - x - 1; it commutes with C + I
COMPANION3 = ((0, 0, 1), (1, 0, 1), (0, 1, 0))


def _block_diag(a, b):
    n, m = len(a), len(b)
    out = [[0] * (n + m) for _ in range(n + m)]
    for i in range(n):
        for j in range(n):
            out[i][j] = a[i][j]
    for i in range(m):
        for j in range(m):
            out[n + i][n + j] = b[i][j]
    return out


def _eye(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def fibonacci() -> IntegerMatrixAction:
    """The cat map [[2,1],[1,1]] on the 2-torus (rank 1)."""
    return verify_action([CAT])


def t4_block() -> IntegerMatrixAction:
    """A + I and I + B on the 4-torus with A the cat map, B = [[3,1],[2,1]]."""
    return verify_action([_block_diag(CAT, _eye(2)), _block_diag(_eye(2), B_BLOCK)])


def cubic_rank2() -> IntegerMatrixAction:
    """C and C + I on the 3-torus, C the companion matrix of x^3 - x - 1.

    Both are unimodular: det C = 1 and det(C + I) = -1 since the
    characteristic polynomial at -1 equals -1.
    """
    c = [list(r) for r in COMPANION3]
    c1 = [[c[i][j] + (i == j) for j in range(3)] for i in range(3)]
    return verify_action([c, c1])


def rotation() -> IntegerMatrixAction:
    """The order-4 rotation [[0,1],[-1,0]]: every exponent vanishes."""
    return verify_action([[[0, 1], [-1, 0]]])


CATALOG = {
    "fibonacci": fibonacci,
    "t4_block": t4_block,
    "cubic_rank2": cubic_rank2,
    "rotation": rotation,
}
