"""
Post-hoc analysis of ablation runs.
"""
