#!/usr/bin/env python3
"""Run an SMT-LIB 2 file through the cvc5 Python bindings (pip install cvc5).

Usage: cvc5_smt2.py FILE [option=value ...]
"""
import sys

import cvc5


def main():
    tm = cvc5.TermManager()
    solver = cvc5.Solver(tm)
    for opt in sys.argv[2:]:
        key, value = opt.split("=", 1)
        solver.setOption(key, value)
    parser = cvc5.InputParser(solver)
    parser.setFileInput(cvc5.InputLanguage.SMT_LIB_2_6, sys.argv[1])
    symbols = parser.getSymbolManager()
    while True:
        cmd = parser.nextCommand()
        if cmd.isNull():
            break
        out = cmd.invoke(solver, symbols)
        if out:
            sys.stdout.write(out)
            sys.stdout.flush()


if __name__ == "__main__":
    main()
