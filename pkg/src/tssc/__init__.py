"""Triad state space construction (TSSC) image encoding and ConvNet classification of chaotic series."""
