"""palinsieve -- Exact and numerical laboratory for palindromic almost-primes."""

__version__ = "0.1.0"
