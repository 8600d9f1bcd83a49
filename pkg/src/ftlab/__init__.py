"""ftlab: build CSS codes over prime fields, verify fault-tolerant gadget
procedures by exhaustive fault injection, compile circuits through
concatenated simulation levels, and estimate the noise threshold both by
closed-form recursion and Monte Carlo fault-path sampling.
"""

__version__ = "0.1.0"
