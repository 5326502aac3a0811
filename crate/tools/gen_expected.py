"""Independent reference for the fixture expectations.

A plain dict-of-basis-states simulation of the iterated guard-copy
construction, sharing no code with the Rust crate. Writes
fixtures/expected/*.json.
"""
import json
import math
import os

S = 1 / math.sqrt(2)


def x_body(r):
    return [(1.0, {**r, "q": 1 - r["q"]})]


def h_body(r):
    s = -S if r["q"] else S
    return [(S, {**r, "q": 0}), (s, {**r, "q": 1})]


def skip_body(r):
    return [(1.0, r)]


def coin_walk(r):
    out = []
    for c, a in ((0, S), (1, -S if r["c"] else S)):
        q = (r["q"] + 1) % 8 if c else (r["q"] - 1) % 8
        out.append((a, {**r, "c": c, "q": q}))
    return out


def dec_body(r):
    return [(1.0, {**r, "q": (r["q"] - 1) % 8})]


def freeze(tape, regs):
    return (tuple(tape), tuple(sorted(regs.items())))


def evaluate(init, guard, body, n, linear):
    state = {}
    for amp, regs in init:
        key = freeze([0] * n, regs)
        state[key] = state.get(key, 0) + amp
    for i in range(n):
        nxt = {}
        for (tape, regs), amp in state.items():
            regs = dict(regs)
            tape = list(tape)
            running = all(tape[:i])
            if running and guard(regs):
                tape[i] = 1
            if running and tape[i]:
                for a, r2 in body(regs):
                    k = freeze(tape, r2)
                    nxt[k] = nxt.get(k, 0) + amp * a
            else:
                k = freeze(tape, regs)
                nxt[k] = nxt.get(k, 0) + amp
        state = nxt
    if linear:
        state = {k: v for k, v in state.items() if not all(k[0])}
    entries = []
    for (tape, regs), amp in sorted(state.items()):
        if abs(amp) <= 1e-15:
            continue
        anc = "".join(map(str, tape)).rstrip("0")
        entries.append({"ancillas": anc, "regs": dict(regs), "re": amp, "im": 0.0})
    mass = sum(e["re"] ** 2 for e in entries if e["ancillas"] != "1" * n)
    return entries, mass


CASES = [
    ("es_uni1", "x_loop.qw", [(S, {"q": 0}), (S, {"q": 1})], lambda r: r["q"] == 1, x_body, 2, "unitary"),
    ("es_uni2", "h_loop.qw", [(S, {"q": 0}), (S, {"q": 1})], lambda r: r["q"] == 1, h_body, 3, "unitary"),
    ("es_uni3", "skip_loop.qw", [(1.0, {"q": 1})], lambda r: r["q"] == 1, skip_body, 5, "unitary"),
    ("es_lni1", "x_loop.qw", [(S, {"q": 0}), (S, {"q": 1})], lambda r: r["q"] == 1, x_body, 2, "linear"),
    ("es_lni2", "h_loop.qw", [(S, {"q": 0}), (S, {"q": 1})], lambda r: r["q"] == 1, h_body, 3, "linear"),
    ("es_lni3", "skip_loop.qw", [(1.0, {"q": 1})], lambda r: r["q"] == 1, skip_body, 5, "linear"),
    ("companion", "companion.qw", [(1.0, {"c": 0, "q": 2})], lambda r: r["q"] > 0, coin_walk, 5, "unitary"),
    ("counter_loop", "counter_loop.qw", [(1.0, {"q": 5})], lambda r: r["q"] > 0, dec_body, 6, "linear"),
]

here = os.path.dirname(os.path.abspath(__file__))
out_dir = os.path.join(here, "..", "fixtures", "expected")
os.makedirs(out_dir, exist_ok=True)
for name, prog, init, guard, body, n, mode in CASES:
    state, mass = evaluate(init, guard, body, n, mode == "linear")
    doc = {"program": prog, "mode": mode, "n": n, "terminated_mass": mass, "state": state}
    with open(os.path.join(out_dir, name + ".json"), "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    print(name, len(state), "terms, terminated mass", mass)
