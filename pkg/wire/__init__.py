"""TCPROS-style wire format: schemas, message codec, connection headers."""
