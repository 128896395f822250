#!/usr/bin/env python3
"""Standalone DPLL solver for DIMACS files; the tests run it as an external
solver to cross-check the embedded one.  Intentionally independent of the
package (plain unit propagation plus chronological backtracking)."""

import sys


def parse(path):
    nvars = 0
    clauses = []
    cur = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line[0] == "c":
                continue
            if line[0] == "p":
                nvars = int(line.split()[2])
                continue
            for tok in line.split():
                lit = int(tok)
                if lit == 0:
                    clauses.append(cur)
                    cur = []
                else:
                    cur.append(lit)
    if cur:
        clauses.append(cur)
    return nvars, clauses


def solve(nvars, clauses):
    assign = {}

    def unit_propagate():
        changed = True
        while changed:
            changed = False
            for clause in clauses:
                unassigned = []
                satisfied = False
                for lit in clause:
                    v = assign.get(abs(lit))
                    if v is None:
                        unassigned.append(lit)
                    elif v == (lit > 0):
                        satisfied = True
                        break
                if satisfied:
                    continue
                if not unassigned:
                    return False
                if len(unassigned) == 1:
                    lit = unassigned[0]
                    assign[abs(lit)] = lit > 0
                    changed = True
        return True

    def rec():
        if not unit_propagate():
            return False
        var = next((v for v in range(1, nvars + 1) if v not in assign), None)
        if var is None:
            return True
        snapshot = dict(assign)
        for val in (True, False):
            assign.clear()
            assign.update(snapshot)
            assign[var] = val
            if rec():
                return True
        assign.clear()
        assign.update(snapshot)
        return False

    if rec():
        for v in range(1, nvars + 1):
            assign.setdefault(v, False)
        return assign
    return None


def main():
    nvars, clauses = parse(sys.argv[1])
    result = solve(nvars, clauses)
    if result is None:
        print("s UNSATISFIABLE")
        return 20
    lits = [v if result[v] else -v for v in sorted(result)]
    for i in range(0, len(lits), 12):
        tail = " 0" if i + 12 >= len(lits) else ""
        print("v " + " ".join(str(l) for l in lits[i : i + 12]) + tail)
    print("s SATISFIABLE")
    return 10


if __name__ == "__main__":
    sys.exit(main())
