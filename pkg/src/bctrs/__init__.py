"""Trust- and reputation-augmented attribute-based access control for IoT,
with a deterministic simulator of the main chain, attribute sidechains and
the participating agents."""

__version__ = "0.1.0"
