"""Short-circuit-resilient formulas and feedback-channel interactive coding.

Submodules:

- ``formulas``      boolean formulas, short-circuit faults, balancing
- ``kw``            protocol trees and both game transforms
- ``channel``       noisy channel with noiseless feedback, budget ledger
- ``pi0``           alternating base protocols fed to the coding schemes
- ``coding_large``  chain-linking coding scheme, large alphabet
- ``coding_small``  constant-alphabet scheme with variable-length links
- ``attacks``       stress adversaries and the optimal confusion attack
- ``hardening``     formula hardening pipeline and reachability pruning
- ``cli``           command-line front end
"""

from . import (
    attacks,
    channel,
    coding_large,
    coding_small,
    formulas,
    hardening,
    kw,
    pi0,
)

__all__ = [
    "attacks",
    "channel",
    "coding_large",
    "coding_small",
    "formulas",
    "hardening",
    "kw",
    "pi0",
]

__version__ = "0.1.0"
