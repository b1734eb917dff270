"""Forecasting model families."""
