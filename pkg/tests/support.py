"""Seeded generators and brute-force oracles for property tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from bpwhile.dist import Dist, outcome_space
from bpwhile.qbf import EXISTS, FORALL, QBF, build_qbf
from bpwhile.syntax import FALSE, TRUE, And, Assign, BExpr, Cmd, Coin, If, Not, Or, Program, Skip, Var, While, assemble_program


def random_expr(rng: random.Random, names: list[str], depth: int = 2) -> BExpr:
    if depth == 0 or rng.random() < 0.35:
        roll = rng.random()
        if roll < 0.35:
            return Coin()
        if roll < 0.45:
            return rng.choice((TRUE, FALSE))
        return Var(rng.choice(names))
    kind = rng.choice(("not", "and", "or"))
    if kind == "not":
        return Not(random_expr(rng, names, depth - 1))
    left, right = random_expr(rng, names, depth - 1), random_expr(rng, names, depth - 1)
    return And(left, right) if kind == "and" else Or(left, right)


def random_body(rng: random.Random, names: list[str], budget: list[int], depth: int, loops: bool) -> tuple[Cmd, ...]:
    commands: list[Cmd] = []
    for _ in range(rng.randint(1, 3)):
        if budget[0] <= 0:
            break
        budget[0] -= 1
        roll = rng.random()
        if depth < 2 and roll < 0.2 and budget[0] >= 2:
            commands.append(
                If(
                    random_expr(rng, names),
                    random_body(rng, names, budget, depth + 1, loops),
                    random_body(rng, names, budget, depth + 1, loops),
                )
            )
        elif loops and depth < 2 and roll < 0.35 and budget[0] >= 1:
            # Loop guards lean on coins so most loops exit eventually.
            guard = And(Var(rng.choice(names)), Coin()) if rng.random() < 0.8 else random_expr(rng, names)
            commands.append(While(guard, random_body(rng, names, budget, depth + 1, loops)))
        elif roll < 0.4:
            commands.append(Skip())
        else:
            commands.append(Assign(rng.choice(names), random_expr(rng, names)))
    return tuple(commands) or (Skip(),)


def random_program(
    rng: random.Random,
    max_vars: int = 6,
    max_lines: int = 12,
    loops: bool = True,
    max_inputs: int = 2,
    max_outputs: int = 2,
) -> Program:
    """A random core program with at least one input bit."""
    total = rng.randint(2, max_vars)
    names = [f"v{i}" for i in range(total)]
    inputs = names[: rng.randint(1, min(max_inputs, total - 1))]
    body = random_body(rng, names, [max_lines], 0, loops)
    outputs = [Var(name) for name in rng.sample(names, rng.randint(1, min(max_outputs, total)))]
    return assemble_program(inputs, body, outputs)


def random_qbf(rng: random.Random, max_vars: int = 3) -> QBF:
    names = [f"q{i}" for i in range(rng.randint(1, max_vars))]
    prefix = [(rng.choice((FORALL, EXISTS)), name) for name in names]
    matrix = _random_matrix(rng, names, 3)
    return build_qbf(prefix, matrix)


def _random_matrix(rng: random.Random, names: list[str], depth: int) -> BExpr:
    if depth == 0 or rng.random() < 0.3:
        return Var(rng.choice(names))
    kind = rng.choice(("not", "and", "or"))
    if kind == "not":
        return Not(_random_matrix(rng, names, depth - 1))
    left, right = _random_matrix(rng, names, depth - 1), _random_matrix(rng, names, depth - 1)
    return And(left, right) if kind == "and" else Or(left, right)


def subset_violation(p_dist: Dist, q_dist: Dist, e_eps: Fraction, delta: Fraction) -> bool:
    """True when some outcome set O has P(O) > e_eps * Q(O) + delta."""
    outcomes = outcome_space(p_dist, q_dist)
    for size in range(1, len(outcomes) + 1):
        for subset in itertools.combinations(outcomes, size):
            lhs = sum((p_dist.get(o) for o in subset), Fraction(0))
            rhs = e_eps * sum((q_dist.get(o) for o in subset), Fraction(0)) + delta
            if lhs > rhs:
                return True
    return False
