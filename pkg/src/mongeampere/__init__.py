"""Classification of parabolic Monge-Ampere equations on the 1-jet space."""

__version__ = "0.1.0"
