"""Causal imitation-learning laboratory.

A desk-scale pipeline that disentangles bird-eye driving observations into
latent variables, selects the ones that Granger-cause speed, predicts the
next-step speed from those causes only, and drives a simulated car with a
throttle/brake controller.
"""

__version__ = "0.1.0"
