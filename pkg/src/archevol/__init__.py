"""Typed-graph toolkit for evolving software architectures.

Architectures (components, ports, connectors) are encoded as typed attributed
graphs; restructurings are expressed as graph transformation rules, analysed
for conflicts and dependencies, and bundled into guided evolution patterns
such as the Client-Server introduction.
"""

__version__ = "0.1.0"
