"""symlen: symbol lengths and Pfister decompositions over finite quadratic form schemes."""

__version__ = "0.1.0"
