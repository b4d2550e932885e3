"""supergrade - exact group gradings and superinvolutions on matrix superalgebras."""

__version__ = "0.1.0"
