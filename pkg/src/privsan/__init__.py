"""Privacy sanitization via norm-bounded random projection, with
baseline mechanisms, a reconstruction adversary, and a seeded benchmark
harness."""

__version__ = "0.1.0"
