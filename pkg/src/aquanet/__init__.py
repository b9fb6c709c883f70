"""From-scratch MLP, LSTM, TCN and ANN classifiers for five-class water quality index prediction."""

__version__ = "0.1.0"
