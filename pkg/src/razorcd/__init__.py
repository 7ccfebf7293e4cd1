"""razorcd: pull-based multi-cluster continuous deployment, desk scale."""

__version__ = "0.1.0"
