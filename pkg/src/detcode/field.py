"""Exact arithmetic in prime fields GF(p) and dense linear algebra over them.

Field elements are plain Python ints kept canonical (0 <= value < p); a
:class:`Field` instance carries the modulus and provides the arithmetic.
:class:`Matrix` implements exact Gauss-Jordan elimination with a
deterministic leftmost-pivot rule, so ranks, inverses, and pivot-column
bases are reproducible across runs and machines.
"""

from __future__ import annotations

from functools import lru_cache


class CompositeModulus(ValueError):
    """Field modulus is not prime."""


class DivideByZero(ZeroDivisionError):
    """Multiplicative inverse of zero requested."""


class DimensionMismatch(ValueError):
    """Matrix shapes (or moduli) do not line up."""


class Singular(ValueError):
    """Square matrix has no inverse."""


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for every modulus that fits a machine word."""
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime_at_least(n: int) -> int:
    """Smallest prime >= n."""
    candidate = max(n, 2)
    while not is_prime(candidate):
        candidate += 1
    return candidate


def element_width(p: int) -> int:
    """Bytes needed to serialize one canonical element of GF(p)."""
    return (p.bit_length() + 7) // 8


class Field:
    """Prime field GF(p).

    Parameters
    ----------
    p : int
        Field modulus; must be prime (checked at construction).
    """

    __slots__ = ("p",)

    def __init__(self, p: int):
        if not is_prime(p):
            raise CompositeModulus(f"modulus {p} is not prime")
        self.p = p

    def element(self, value: int) -> int:
        """Canonical representative of *value* in [0, p)."""
        return value % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def inv(self, a: int) -> int:
        """Multiplicative inverse; raises DivideByZero on 0."""
        if a % self.p == 0:
            raise DivideByZero(f"0 has no inverse in GF({self.p})")
        return pow(a, -1, self.p)

    def signed(self, a: int, exponent: int) -> int:
        """(-1)**exponent * a, reduced mod p."""
        return a % self.p if exponent % 2 == 0 else -a % self.p

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return f"Field({self.p})"


class Matrix:
    """Dense matrix over a prime field; all entries canonical ints.

    Rows and columns are 0-indexed here; higher-level modules translate
    their subset labels to positions before touching a Matrix.
    """

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: Field, data, cols: int | None = None):
        p = field.p
        self.field = field
        self.data = [[v % p for v in row] for row in data]
        self.rows = len(self.data)
        if self.rows:
            self.cols = len(self.data[0])
            if any(len(row) != self.cols for row in self.data):
                raise DimensionMismatch("ragged rows")
            if cols is not None and cols != self.cols:
                raise DimensionMismatch("explicit cols disagrees with data")
        else:
            if cols is None:
                raise DimensionMismatch("empty matrix needs an explicit column count")
            self.cols = cols

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Matrix":
        return cls(field, [[0] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        return cls(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        return self.data[i][j]

    def row(self, i: int) -> list[int]:
        return list(self.data[i])

    def column(self, j: int) -> list[int]:
        return [row[j] for row in self.data]

    def set(self, i: int, j: int, value: int) -> None:
        self.data[i][j] = value % self.field.p

    def copy(self) -> "Matrix":
        return Matrix(self.field, [row[:] for row in self.data], cols=self.cols)

    def submatrix(self, row_indices, col_indices) -> "Matrix":
        rows = list(row_indices)
        cols = list(col_indices)
        return Matrix(
            self.field,
            [[self.data[i][j] for j in cols] for i in rows],
            cols=len(cols),
        )

    def transpose(self) -> "Matrix":
        return Matrix(
            self.field,
            [list(col) for col in zip(*self.data)] if self.rows else [],
            cols=self.rows,
        )

    @staticmethod
    def hstack(blocks: list["Matrix"]) -> "Matrix":
        if not blocks:
            raise DimensionMismatch("nothing to stack")
        first = blocks[0]
        if any(b.rows != first.rows or b.field != first.field for b in blocks):
            raise DimensionMismatch("row counts or moduli differ")
        data = [sum((b.data[i] for b in blocks), []) for i in range(first.rows)]
        return Matrix(first.field, data, cols=sum(b.cols for b in blocks))

    @classmethod
    def stack_rows(cls, field: Field, vectors) -> "Matrix":
        return cls(field, [list(v) for v in vectors])

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.field != other.field:
            raise DimensionMismatch("moduli differ")
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot multiply {self.shape} by {other.shape}"
            )
        p = self.field.p
        bt = list(zip(*other.data)) if other.rows else []
        data = [
            [sum(a * b for a, b in zip(row, col)) % p for col in bt]
            for row in self.data
        ]
        return Matrix(self.field, data, cols=other.cols)

    def mul_vec(self, vec: list[int]) -> list[int]:
        """Matrix-times-column-vector product."""
        if len(vec) != self.cols:
            raise DimensionMismatch("vector length != column count")
        p = self.field.p
        return [sum(a * b for a, b in zip(row, vec)) % p for row in self.data]

    def _eliminate(self):
        """Gauss-Jordan to reduced row echelon form; leftmost pivots first.

        Returns (rref rows, pivot column indices). Column linear relations
        are preserved by row operations, which is what pivot_columns relies on.
        """
        p = self.field.p
        a = [row[:] for row in self.data]
        pivots: list[int] = []
        r = 0
        for c in range(self.cols):
            pivot_row = next((i for i in range(r, self.rows) if a[i][c]), None)
            if pivot_row is None:
                continue
            a[r], a[pivot_row] = a[pivot_row], a[r]
            inv = pow(a[r][c], -1, p)
            a[r] = [v * inv % p for v in a[r]]
            lead = a[r]
            for i in range(self.rows):
                if i != r and a[i][c]:
                    f = a[i][c]
                    a[i] = [(v - f * w) % p for v, w in zip(a[i], lead)]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return a, pivots

    def rank(self) -> int:
        return len(self._eliminate()[1])

    def pivot_columns(self):
        """Lexicographically-first maximal independent column set, plus expansions.

        Returns (pivots, expansion) where pivots is the ordered list of pivot
        column indices and expansion maps every non-pivot column index j to
        the coefficient list (c_0, ..., c_{k-1}) with
        column_j == sum_k c_k * column_{pivots[k]}, exactly.
        """
        rref, pivots = self._eliminate()
        pivot_set = set(pivots)
        expansion = {
            j: tuple(rref[k][j] for k in range(len(pivots)))
            for j in range(self.cols)
            if j not in pivot_set
        }
        return pivots, expansion

    def inverse(self) -> "Matrix":
        """Exact inverse by Gauss-Jordan; raises Singular when rank-deficient."""
        if self.rows != self.cols:
            raise DimensionMismatch("only square matrices have inverses")
        n = self.rows
        p = self.field.p
        a = [row[:] + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(self.data)]
        for c in range(n):
            pivot_row = next((i for i in range(c, n) if a[i][c]), None)
            if pivot_row is None:
                raise Singular(f"rank < {n}")
            a[c], a[pivot_row] = a[pivot_row], a[c]
            inv = pow(a[c][c], -1, p)
            a[c] = [v * inv % p for v in a[c]]
            lead = a[c]
            for i in range(n):
                if i != c and a[i][c]:
                    f = a[i][c]
                    a[i] = [(v - f * w) % p for v, w in zip(a[i], lead)]
        return Matrix(self.field, [row[n:] for row in a], cols=n)

    def det(self) -> int:
        """Exact determinant mod p (forward elimination with swap tracking)."""
        if self.rows != self.cols:
            raise DimensionMismatch("determinant needs a square matrix")
        n = self.rows
        p = self.field.p
        a = [row[:] for row in self.data]
        result = 1
        for c in range(n):
            pivot_row = next((i for i in range(c, n) if a[i][c]), None)
            if pivot_row is None:
                return 0
            if pivot_row != c:
                a[c], a[pivot_row] = a[pivot_row], a[c]
                result = -result
            result = result * a[c][c] % p
            inv = pow(a[c][c], -1, p)
            lead = a[c]
            for i in range(c + 1, n):
                if a[i][c]:
                    f = a[i][c] * inv % p
                    a[i] = [(v - f * w) % p for v, w in zip(a[i], lead)]
        return result % p

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.data for v in row)

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and other.field == self.field
            and other.shape == self.shape
            and other.data == self.data
        )

    def __repr__(self):
        return f"Matrix(GF({self.field.p}), {self.rows}x{self.cols})"


def vec_mat(vec: list[int], matrix: Matrix) -> list[int]:
    """Row-vector-times-matrix product, exact mod p."""
    if len(vec) != matrix.rows:
        raise DimensionMismatch("vector length != row count")
    p = matrix.field.p
    return [
        sum(v * row[j] for v, row in zip(vec, matrix.data)) % p
        for j in range(matrix.cols)
    ]
