"""Finite models of dynamical systems over finite fields with a commuting
group action, and exact checks of the idempotent-relation point-count and
zeta identities for their quotients."""

__version__ = "0.1.0"
