"""Trials, experiments, the diversity probe and result statistics."""
