"""Deterministic simulated LAN: scheduler, switch, hosts, ARP, frame trace."""
