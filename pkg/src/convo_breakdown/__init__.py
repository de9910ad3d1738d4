"""Breakdown detection for conversational recommender dialogues."""

__version__ = "0.1.0"
