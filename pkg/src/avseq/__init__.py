"""avseq: divisibility sequences from rank-one points on E^m/H.

Exact-arithmetic toolkit for the sequences C_n attached to rational points
on quotients of powers of an elliptic curve, with the reduction pipeline
(period n1, quotient curve, quotient point) and primitive-divisor reports.
"""

__version__ = "0.1.0"
