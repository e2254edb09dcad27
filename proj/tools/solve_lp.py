#!/usr/bin/env python3
"""Solve a CPLEX-LP-format MIP with scipy's HiGHS backend.

Reads the subset of the LP format that optimization libraries commonly
emit: an objective, named rows with <= / >= / =, a Bounds section with
explicit or infinite limits, and Binary / General variable lists.
Prints "status=... objective=..." on one line.
"""

import argparse
import math
import re
import sys

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, milp

SECTIONS = {
    "minimize": "obj",
    "maximize": "obj",
    "subject to": "rows",
    "such that": "rows",
    "st": "rows",
    "s.t.": "rows",
    "bounds": "bounds",
    "bound": "bounds",
    "binary": "binary",
    "binaries": "binary",
    "bin": "binary",
    "general": "general",
    "generals": "general",
    "gen": "general",
    "integer": "general",
    "integers": "general",
    "end": "end",
}

TOKEN = re.compile(
    r"""(?P<num>[0-9]+(?:\.[0-9]*)?(?:[eE][+-]?[0-9]+)?|\.[0-9]+(?:[eE][+-]?[0-9]+)?)
      | (?P<name>[A-Za-z_!"\#$%&(),;?@'`{}|~.][A-Za-z0-9_!"\#$%&(),;?@'`{}|~.]*)
      | (?P<op><=|=<|>=|=>|=|\+|-|:)""",
    re.VERBOSE,
)

INF_NAMES = {"inf", "infinity"}


def strip_comment(line):
    cut = line.find("\\")
    return line if cut < 0 else line[:cut]


def split_sections(text):
    """Returns {section: [line, ...]} with comments stripped."""
    out = {"obj": [], "rows": [], "bounds": [], "binary": [], "general": []}
    current = None
    sense = 1
    for raw in text.splitlines():
        line = strip_comment(raw).strip()
        if not line:
            continue
        key = SECTIONS.get(line.lower())
        if key == "end":
            break
        if key is not None:
            current = key
            if key == "obj" and line.lower().startswith("max"):
                sense = -1
            continue
        if current is None:
            raise ValueError(f"content before any section header: {line!r}")
        out[current].append(line)
    return out, sense


def tokens(lines):
    for line in lines:
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            m = TOKEN.match(line, pos)
            if not m:
                raise ValueError(f"cannot tokenize at {line[pos:pos+20]!r}")
            pos = m.end()
            if m.lastgroup == "num":
                yield ("num", float(m.group()))
            elif m.lastgroup == "name":
                low = m.group().lower()
                if low in INF_NAMES:
                    yield ("num", math.inf)
                else:
                    yield ("name", m.group())
            else:
                yield ("op", m.group().replace("=<", "<=").replace("=>", ">="))


def parse_terms(toks, i, col_of):
    """Parses  [+|-] [coef] name ...  returning (terms, constant, next_i)."""
    terms = []
    const = 0.0
    while i < len(toks):
        sign = 1.0
        start = i
        while i < len(toks) and toks[i] == ("op", "+") or toks[i] == ("op", "-"):
            if toks[i][1] == "-":
                sign = -sign
            i += 1
        if i >= len(toks) or toks[i][0] == "op":
            if i != start:
                raise ValueError("dangling sign in expression")
            break
        coef = sign
        if toks[i][0] == "num":
            coef = sign * toks[i][1]
            i += 1
        if i < len(toks) and toks[i][0] == "name":
            # A label for the next row ends the expression.
            if i + 1 < len(toks) and toks[i + 1] == ("op", ":"):
                if i != start:
                    raise ValueError("row label in the middle of an expression")
                break
            terms.append((col_of(toks[i][1]), coef))
            i += 1
        else:
            const += coef
    return terms, const, i


class Model:
    def __init__(self):
        self.cols = {}
        self.names = []
        self.c = []
        self.rows = []  # (terms, lo, hi)
        self.lo = []
        self.hi = []
        self.integer = set()

    def col(self, name):
        j = self.cols.get(name)
        if j is None:
            j = self.cols[name] = len(self.names)
            self.names.append(name)
            self.c.append(0.0)
            self.lo.append(0.0)
            self.hi.append(math.inf)
        return j


def parse_lp(text):
    sections, sense = split_sections(text)
    model = Model()

    toks = list(tokens(sections["obj"]))
    i = 0
    if len(toks) >= 2 and toks[0][0] == "name" and toks[1] == ("op", ":"):
        i = 2
    terms, const, i = parse_terms(toks, i, model.col)
    if i != len(toks):
        raise ValueError(f"trailing objective tokens: {toks[i:i+4]}")
    for j, a in terms:
        model.c[j] += sense * a

    toks = list(tokens(sections["rows"]))
    i = 0
    while i < len(toks):
        if toks[i][0] != "name" or i + 1 >= len(toks) or toks[i + 1] != ("op", ":"):
            raise ValueError(f"expected row label, got {toks[i:i+3]}")
        i += 2
        terms, const, i = parse_terms(toks, i, model.col)
        if i >= len(toks) or toks[i][0] != "op" or toks[i][1] not in ("<=", ">=", "="):
            raise ValueError("row without a relational operator")
        rel = toks[i][1]
        i += 1
        sign = 1.0
        while i < len(toks) and toks[i][0] == "op" and toks[i][1] in ("+", "-"):
            if toks[i][1] == "-":
                sign = -sign
            i += 1
        if i >= len(toks) or toks[i][0] != "num":
            raise ValueError("row without a right-hand side")
        rhs = sign * toks[i][1] - const
        i += 1
        lo = rhs if rel in (">=", "=") else -math.inf
        hi = rhs if rel in ("<=", "=") else math.inf
        model.rows.append((terms, lo, hi))

    for line in sections["bounds"]:
        parse_bound(line, model)

    for kind in ("binary", "general"):
        for _, name in (t for t in tokens(sections[kind]) if t[0] == "name"):
            j = model.col(name)
            model.integer.add(j)
            if kind == "binary":
                model.lo[j] = max(model.lo[j], 0.0)
                model.hi[j] = min(model.hi[j], 1.0)

    return model, sense


def parse_bound(line, model):
    toks = list(tokens([line]))
    # name free
    if (
        len(toks) == 2
        and toks[0][0] == "name"
        and toks[1][0] == "name"
        and toks[1][1].lower() == "free"
    ):
        j = model.col(toks[0][1])
        model.lo[j], model.hi[j] = -math.inf, math.inf
        return

    def num_at(i):
        sign = 1.0
        while toks[i][0] == "op" and toks[i][1] in ("+", "-"):
            if toks[i][1] == "-":
                sign = -sign
            i += 1
        if toks[i][0] != "num":
            raise ValueError(f"expected a number in bound: {line!r}")
        return sign * toks[i][1], i + 1

    i = 0
    lead = None
    if toks[i][0] != "name":
        lead, i = num_at(i)
    if lead is not None:
        rel = toks[i][1]
        i += 1
        j = model.col(toks[i][1])
        i += 1
        if rel == "<=":
            model.lo[j] = lead
        elif rel == ">=":
            model.hi[j] = lead
        else:
            raise ValueError(f"bad bound line: {line!r}")
        if i < len(toks):  # lo <= name <= hi
            rel2 = toks[i][1]
            val, i = num_at(i + 1)
            if rel2 == "<=":
                model.hi[j] = val
            else:
                raise ValueError(f"bad bound line: {line!r}")
        return
    j = model.col(toks[i][1])
    i += 1
    rel = toks[i][1]
    val, i = num_at(i + 1)
    if rel == "<=":
        model.hi[j] = val
    elif rel == ">=":
        model.lo[j] = val
    elif rel == "=":
        model.lo[j] = model.hi[j] = val
    else:
        raise ValueError(f"bad bound line: {line!r}")


def solve(model, sense, gap, time_limit):
    n = len(model.names)
    rows, cols, vals = [], [], []
    rlo, rhi = [], []
    for r, (terms, lo, hi) in enumerate(model.rows):
        acc = {}
        for j, a in terms:
            acc[j] = acc.get(j, 0.0) + a
        for j, a in acc.items():
            rows.append(r)
            cols.append(j)
            vals.append(a)
        rlo.append(lo)
        rhi.append(hi)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(model.rows), n))
    integrality = np.zeros(n)
    for j in model.integer:
        integrality[j] = 1
    options = {"mip_rel_gap": gap}
    if time_limit is not None:
        options["time_limit"] = time_limit
    res = milp(
        c=np.array(model.c),
        constraints=LinearConstraint(A, np.array(rlo), np.array(rhi)),
        integrality=integrality,
        bounds=Bounds(np.array(model.lo), np.array(model.hi)),
        options=options,
    )
    return res


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("lp_file")
    ap.add_argument("--mip-rel-gap", type=float, default=0.0)
    ap.add_argument("--time-limit", type=float, default=None)
    args = ap.parse_args()

    with open(args.lp_file, encoding="utf-8") as fh:
        text = fh.read()
    model, sense = parse_lp(text)
    res = solve(model, sense, args.mip_rel_gap, args.time_limit)
    if res.status == 0:
        print(f"status=optimal objective={sense * res.fun:.10g}")
        return 0
    label = {1: "iteration_limit", 2: "infeasible", 3: "unbounded"}.get(
        res.status, "failed"
    )
    print(f"status={label}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
