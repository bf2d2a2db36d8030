"""Localized Klein-Gordon solutions along prescribed trajectories."""
