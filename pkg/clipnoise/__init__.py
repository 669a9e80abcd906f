"""DCO-OFDM clipping noise: analytic statistics and Monte Carlo validation."""
