"""Countermeasures: authenticated payloads and subscriber-side anomaly bounds."""
