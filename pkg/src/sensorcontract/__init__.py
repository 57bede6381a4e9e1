"""Two-stage operator/sensor contracting with reputation and stochastic verification."""
