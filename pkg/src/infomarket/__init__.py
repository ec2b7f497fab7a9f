"""Deterministic simulator of an AI-era information market.

Producers, consumers, and a platform play a three-stage game each tick;
a four-dimension pollution index tracks ecosystem health; policy
instruments and an experiment harness reproduce the headline comparative
statics at desk scale.
"""

__version__ = "0.1.0"
