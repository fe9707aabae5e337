"""Source generators for standard mechanisms used as verification targets."""

from __future__ import annotations

from fractions import Fraction

from .dist import Dist
from .errors import InvalidParameterError
from .semantics import BOTTOM

RANDOMIZED_RESPONSE = """\
input(x);
a := random;
b := random;
if a && b then {
    r := !x;
} else {
    r := x;
};
return(r)
"""


def randomized_response_source() -> str:
    """Answer truthfully unless two coins both come up heads (flip probability 1/4)."""
    return RANDOMIZED_RESPONSE


def k_for_epsilon(eps: Fraction) -> int:
    """ceil(log2(2 / eps)), computed exactly."""
    eps = Fraction(eps)
    if eps <= 0:
        raise InvalidParameterError("epsilon must be positive")
    target = 2 / eps
    k = 0
    while Fraction(2) ** k < target:
        k += 1
    while Fraction(2) ** (k - 1) >= target:
        k -= 1
    return k


def geometric_privacy(k: int) -> Fraction:
    """e^eps achieved by the finite-precision mechanism: 1 + 2^-k."""
    return 1 + Fraction(1, 1 << k)


def _denominator(n: int, k: int) -> int:
    return ((1 << (k + 1)) + 1) * ((1 << k) + 1) ** (n - 1)


def _below_cut(n: int, k: int, j: int) -> int:
    """Cut point for z = c - j, left of the true count."""
    return (1 << (k * j)) * ((1 << k) + 1) ** (n - j)


def _above_cut(n: int, k: int, j: int) -> int:
    """Cut point for z = c + j, at or right of the true count."""
    return _denominator(n, k) - (1 << (k * (j + 1))) * ((1 << k) + 1) ** (n - 1 - j)


def _thresholds(n: int, k: int, c: int) -> list[int]:
    """Inverse-CDF cut points: release z when u is at most the z-th value."""
    return [_below_cut(n, k, c - z) if z < c else _above_cut(n, k, z - c) for z in range(n)]


def _check(n: int, k: int) -> None:
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    if k < 0:
        raise InvalidParameterError(f"k must be nonnegative, got {k}")


def geometric_mechanism_source(n: int, k: int) -> str:
    """Extended source of the bounded geometric mechanism over counts 0..n.

    The input count block is clamped to n; the released count ``r`` is returned.
    """
    _check(n, k)
    d = _denominator(n, k)
    width = n.bit_length()
    lines = [
        f"input(c[{width}]);",
        f"block u[{d.bit_length()}], z[{width}], r[{width}];",
        f"if {n} < c then {{",
        f"    c := {n};",
        "} else {",
        "    skip;",
        "};",
        f"u := uniform(0, {d}];",
        "z := 0;",
        f"r := {n};",
        f"while z < {n} && r == {n} then {{",
        "    if z < c then {",
    ]

    def release(test: str, cut: int) -> list[str]:
        return [
            f"        if {test} then {{",
            f"            if u <= {cut} then {{",
            "                r := z;",
            "            } else {",
            "                skip;",
            "            };",
            "        } else {",
            "            skip;",
            "        };",
        ]

    for j in range(1, n + 1):
        lines += release(f"c - z == {j}", _below_cut(n, k, j))
    lines.append("    } else {")
    for j in range(n):
        lines += release(f"z - c == {j}", _above_cut(n, k, j))
    lines += [
        "    };",
        "    z := z + 1;",
        "};",
        "return(r)",
    ]
    return "\n".join(lines) + "\n"


def geometric_mechanism_distribution(n: int, k: int, c: int) -> Dist:
    """Closed-form output distribution of :func:`geometric_mechanism_source` on count ``c``."""
    _check(n, k)
    if c < 0:
        raise InvalidParameterError(f"count must be nonnegative, got {c}")
    c = min(c, n)
    d = _denominator(n, k)
    width = n.bit_length()
    masses: dict[str, Fraction] = {}
    previous = 0
    for z, cut in enumerate(_thresholds(n, k, c)):
        masses[format(z, f"0{width}b")] = Fraction(max(cut - previous, 0), d)
        previous = max(previous, cut)
    masses[format(n, f"0{width}b")] = Fraction(d - previous, d)
    masses[BOTTOM] = Fraction(0)
    return Dist.from_mapping(masses)
