"""IIDS: feature selection, class balancing and random-forest intrusion detection."""

__version__ = "0.1.0"
