"""SAT-based bounded model checking for linear temporal logic with past (PLTL).

The package is organised around a small set of layers:

* :mod:`pltlbmc.pltl`    formulas, parsing, positive normal form
* :mod:`pltlbmc.model`   symbolic Kripke structures and explicit expansion
* :mod:`pltlbmc.sat`     circuits, CNF, and an embedded incremental CDCL solver
* :mod:`pltlbmc.encode`  the bounded model checking encodings
* :mod:`pltlbmc.l2s`     the liveness-to-safety transformation
* :mod:`pltlbmc.tightba` tight symbolic Buechi automata via virtual unrolling
* :mod:`pltlbmc.oracle`  brute-force ground truth used for validation
* :mod:`pltlbmc.check`   the verification driver (witnesses, completeness)
* :mod:`pltlbmc.cli`     command line front end
"""

__version__ = "0.1.0"
