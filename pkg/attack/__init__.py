"""PitM relay: subnet scan, ARP poisoning, flow filter, message mutation, forwarding."""
