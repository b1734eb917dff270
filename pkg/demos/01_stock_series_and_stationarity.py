# %% [markdown]
# # Hourly stock series and stationarity
#
# Build the seeded reference stock series, look at its daily and weekly shape,
# and check which transform makes it stationary enough for ARIMA.

# %%
import matplotlib.pyplot as plt
import numpy as np

from ecforecast.series import business_day_mask
from ecforecast.stats import adf_test, correlogram, log_difference
from ecforecast.synth import REFERENCE_SPEC, expected_level, generate_series

series = generate_series(REFERENCE_SPEC)
print(len(series), "hours from", series.index.start, "to", series.index.end)

# %% [markdown]
# The last four weeks against the noiseless target level.

# %%
tail = series.values[-24 * 28:]
target = expected_level(REFERENCE_SPEC)[-24 * 28:]
fig, ax = plt.subplots(figsize=(10, 3))
ax.plot(tail, lw=0.8, label="stock")
ax.plot(target, lw=1.5, label="target level")
ax.set_xlabel("hour")
ax.legend()

# %% [markdown]
# Business hours vs weekend hours.

# %%
mask = business_day_mask(series.index)
print("mean stock, business days: %.1f" % series.values[mask].mean())
print("mean stock, weekends:      %.1f" % series.values[~mask].mean())

# %% [markdown]
# ADF on the log series and on its first difference.

# %%
for d in (0, 1):
    w, _ = log_difference(series.values, d)
    res = adf_test(w)
    print(f"d={d}: statistic {res.statistic:8.3f}  p={res.p_value:.3g}  lags {res.lags_used}")

# %%
w, _ = log_difference(series.values, 1)
rho, phi = correlogram(w, 72)
fig, axes = plt.subplots(1, 2, figsize=(10, 3), sharey=True)
for ax, vals, name in zip(axes, (rho, phi), ("ACF", "PACF")):
    ax.vlines(np.arange(vals.size), 0, vals)
    ax.axhline(1.96 / np.sqrt(w.size), ls="--", c="grey")
    ax.axhline(-1.96 / np.sqrt(w.size), ls="--", c="grey")
    ax.set_title(f"{name} of log-differenced stock")
plt.show()
