"""Mean-payoff and variance trade-offs in finite MDPs."""
