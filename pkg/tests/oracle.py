"""Independent term-expansion oracle for the built-in scenarios.

States are plain dicts ``{(path, prop): amplitude}``; components are maps from
a single ket to a dict of kets.  Nothing here imports the package, so an
agreement with the engine checks both the linear algebra and the SDL lowering.
"""
from __future__ import annotations

import cmath
import math

R2 = math.sqrt(2.0)
SPINS = ("s_up", "s_dn")


def ket(path, prop, amp=1.0):
    return {(str(path), prop): complex(amp)}


def add(*states):
    out = {}
    for s in states:
        for k, v in s.items():
            out[k] = out.get(k, 0) + v
    return out


def scale(c, s):
    return {k: c * v for k, v in s.items()}


def braket(bra, k):
    return sum(bra[key].conjugate() * v for key, v in k.items() if key in bra)


def normalized(s):
    n = math.sqrt(sum(abs(v) ** 2 for v in s.values()))
    return scale(1 / n, s)


def apply_map(f, s):
    """Extend a ket map ``f`` linearly to a whole state."""
    return add(*(scale(v, f(k)) for k, v in s.items()))


# components ------------------------------------------------------------------

def bfield(inp, up_out, dn_out):
    """Swap |in,s_up> with |up_out,s_up> and |in,s_dn> with |dn_out,s_dn>."""
    inp, up_out, dn_out = str(inp), str(up_out), str(dn_out)

    def f(k):
        p, q = k
        for spin, out in (("s_up", up_out), ("s_dn", dn_out)):
            if q == spin and p == inp:
                return {(out, q): 1}
            if q == spin and p == out:
                return {(inp, q): 1}
        return {k: 1}
    return f


def splitter(a, b, theta=math.pi / 4):
    a, b = str(a), str(b)
    c, s = math.cos(theta), 1j * math.sin(theta)

    def f(k):
        p, q = k
        if p == a:
            return {(a, q): c, (b, q): s}
        if p == b:
            return {(a, q): s, (b, q): c}
        return {k: 1}
    return f


def turner(path, axis, angle):
    """exp(-i angle sigma_axis / 2) on the spin tokens of one path."""
    path = str(path)
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    # columns of the rotation, written out by hand for each axis
    cols = {
        "x": {"s_up": {"s_up": c, "s_dn": -1j * s}, "s_dn": {"s_up": -1j * s, "s_dn": c}},
        "y": {"s_up": {"s_up": c, "s_dn": s}, "s_dn": {"s_up": -s, "s_dn": c}},
        "z": {"s_up": {"s_up": c - 1j * s}, "s_dn": {"s_dn": c + 1j * s}},
    }[axis]

    def f(k):
        p, q = k
        if p != path or q not in SPINS:
            return {k: 1}
        return {(p, q2): amp for q2, amp in cols[q].items()}
    return f


def phase(path, phi):
    path = str(path)

    def f(k):
        return {k: cmath.exp(1j * phi) if k[0] == path else 1}
    return f


def run(components, s):
    for f in components:
        s = apply_map(f, s)
    return s


# observables ------------------------------------------------------------------

def proj_path(path):
    path = str(path)
    return lambda k: {k: 1} if k[0] == path else {}


def spin_pauli(axis):
    def f(k):
        p, q = k
        if q == "s_up":
            return {"x": {(p, "s_dn"): 1}, "y": {(p, "s_dn"): 1j}, "z": {(p, "s_up"): 1}}[axis]
        if q == "s_dn":
            return {"x": {(p, "s_up"): 1}, "y": {(p, "s_up"): -1j}, "z": {(p, "s_dn"): -1}}[axis]
        return {}
    return f


def spin_dn(k):
    return {k: 1} if k[1] == "s_dn" else {}


def compose(f, g):
    """``f`` after ``g``."""
    return lambda k: apply_map(f, g(k))


def weak_value(obs, pre, post, evolution=()):
    pre = run(evolution, normalized(pre))
    post = normalized(post)
    den = braket(post, pre)
    if abs(den) < 1e-12:
        return None
    return braket(post, apply_map(obs, pre)) / den


# scenarios -------------------------------------------------------------------

def _hs_pre():
    return scale(1 / R2, add(ket(1, "L_p"), scale(1 / R2, add(ket(2, "s_up"), ket(2, "s_dn")))))


def _hs_printed_pre():
    return add(ket(1, "L_p"), ket(2, "s_up"), ket(2, "s_dn"))


_HS_POST = add(ket(1, "L_p"), ket(3, "s_up"))

SCENARIOS = {
    "helicity-sign": dict(
        pre=_hs_pre(), post=_HS_POST, evolution=[bfield(2, 3, 4)],
        observables={"P1": proj_path(1), "P2": proj_path(2), "P3": proj_path(3)},
    ),
    "helicity-sign-printed": dict(
        pre=_hs_printed_pre(), post=_HS_POST, evolution=[bfield(2, 3, 4)],
        observables={"P1": proj_path(1), "P2": proj_path(2), "P3": proj_path(3)},
    ),
    "helicity-preserving": dict(
        pre=add(ket(5, "L_-p"), ket(3, "s_up")),
        post=add(ket(5, "L_-p"), ket(4, "s_dn")),
        evolution=[splitter(3, 4, math.pi / 2), turner(4, "x", math.pi)],
        observables={"P4": proj_path(4), "S4dn": compose(proj_path(4), spin_dn)},
    ),
    "helicity-reversing": dict(
        pre=add(ket(5, "L_p"), ket(3, "s_up")),
        post=add(ket(5, "L_-p"), ket(4, "s_up")),
        evolution=[splitter(3, 4, math.pi / 2)],
        observables={"P4": proj_path(4)},
    ),
    "cheshire-cat": dict(
        pre=add(ket(1, "s_up", 1j), ket(2, "s_up")),
        post=add(ket(1, "s_up"), ket(2, "s_dn")),
        evolution=[],
        observables={
            "PL": proj_path(1),
            "PR": proj_path(2),
            "SzPL": compose(spin_pauli("y"), proj_path(1)),
            "SzPR": compose(spin_pauli("y"), proj_path(2)),
        },
    ),
}


def oracle_weak_values(name, interpretation):
    sc = SCENARIOS[name]
    evo = sc["evolution"] if interpretation == "evolved" else []
    return {k: weak_value(f, sc["pre"], sc["post"], evo) for k, f in sc["observables"].items()}
