"""Alternating binary base protocols fed to the coding schemes.

A base protocol is a fixed-length, strictly alternating exchange of bits:
round k's speaker is determined by parity, and the bit each party sends is
a function of its own input and the transcript so far.  Protocol trees that
are not naturally alternating (or not of uniform depth) are adapted by
inserting dummy rounds and padding every branch to a common length.
"""

from __future__ import annotations

import random

from .formulas import Lit
from .kw import ALICE, PLeaf, PNode, Protocol


class AlternatingProtocol:
    """Base class: subclasses set ``length``/``first_speaker`` and implement
    ``next_bit``."""

    length: int
    first_speaker: int

    def speaker_of(self, k: int) -> int:
        """Speaker of round k (1-based)."""
        return (self.first_speaker + k - 1) % 2

    def next_bit(self, side: int, own_input, transcript: str) -> int:
        raise NotImplementedError

    def transcript(self, x, y) -> str:
        out = []
        for k in range(1, self.length + 1):
            side = self.speaker_of(k)
            out.append(str(self.next_bit(side, x if side == ALICE else y, "".join(out))))
        return "".join(out)


class RandomAlternatingProtocol(AlternatingProtocol):
    """Seeded random next-bit tables: bit(prefix, input) is a fixed random
    affine function of the input bits, drawn once per transcript prefix."""

    def __init__(self, length: int, seed: int, first_speaker: int = ALICE, input_bits: int = 8):
        if length < 1:
            raise ValueError("protocol length must be >= 1")
        self.length = length
        self.first_speaker = first_speaker
        self.input_bits = input_bits
        self.seed = seed
        rng = random.Random(seed)
        self._base = {}
        self._mask = {}
        prefixes = [""]
        for _ in range(length):
            nxt = []
            for p in prefixes:
                self._base[p] = rng.randrange(2)
                self._mask[p] = rng.getrandbits(input_bits)
                nxt.extend((p + "0", p + "1"))
            prefixes = nxt

    def random_input(self, rng: random.Random) -> int:
        return rng.getrandbits(self.input_bits)

    def next_bit(self, side: int, own_input: int, transcript: str) -> int:
        base = self._base.get(transcript)
        if base is None:  # off-table query from a garbage view
            return 0
        return base ^ (bin(self._mask[transcript] & own_input).count("1") & 1)


class TreeAlternatingProtocol(AlternatingProtocol):
    """Adapter turning a protocol tree into an alternating protocol.

    Speakers strictly alternate starting from the root's owner.  When the
    walk sits at a node the scheduled speaker does not own, the round is a
    dummy 0 bit; once a leaf is reached, remaining rounds up to the padded
    length are dummies too.  Off-path queries (garbage transcripts) return 0.
    """

    def __init__(self, protocol: Protocol):
        self.base = protocol
        root = protocol.root
        self.first_speaker = root.owner if isinstance(root, PNode) else ALICE
        self.length = max(1, self._padded(root, self.first_speaker))

    def _padded(self, node, turn: int) -> int:
        if isinstance(node, PLeaf):
            return 0
        if node.owner == turn:
            return 1 + max(self._padded(c, 1 - turn) for c in node.children)
        return 1 + self._padded(node, 1 - turn)

    def _replay(self, transcript: str):
        node = self.base.root
        turn = self.first_speaker
        for c in transcript:
            if isinstance(node, PNode) and node.owner == turn:
                node = node.children[min(int(c), len(node.children) - 1)]
            turn = 1 - turn
        return node, turn

    def next_bit(self, side: int, own_input, transcript: str) -> int:
        node, turn = self._replay(transcript)
        if not isinstance(node, PNode) or node.owner != side:
            return 0
        mv = node.moves.get(tuple(own_input))
        return mv if mv is not None else 0

    def literal_of(self, transcript: str) -> Lit:
        """Decode the output literal from a full simulated transcript."""
        node, _ = self._replay(transcript[: self.length])
        if not isinstance(node, PLeaf):
            raise ValueError("transcript does not reach a leaf")
        return node.lit
