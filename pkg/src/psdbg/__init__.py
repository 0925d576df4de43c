"""psdbg: a sequent-calculus prover, a proof-script language, and a
time-travel debugger for proof scripts, with a JSON debug protocol."""

__version__ = "0.1.0"
