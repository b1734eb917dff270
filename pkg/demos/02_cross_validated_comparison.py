# %% [markdown]
# # Naive, ARIMA and LSTM under monthly cross-validation
#
# Five folds stepping back one calendar month, each testing the final 168
# hours. The LSTM uses the reduced desktop network, so the whole run takes
# about a minute and a half.

# %%
import warnings

import matplotlib.pyplot as plt

from ecforecast.evaluation import make_folds, run_cv
from ecforecast.forecaster import tuned_spec
from ecforecast.models.base import ModelFamily, ModelSpec
from ecforecast.models.lstm import REDUCED_NETWORK
from ecforecast.synth import REFERENCE_SPEC, generate_series

series = generate_series(REFERENCE_SPEC)
folds = make_folds(series.index, 5)
for f in folds:
    print(f.fold_id, "train to", f.train_end, "| test", f.test_start, "->", f.test_end)

# %%
specs = [ModelSpec(ModelFamily.NAIVE), tuned_spec(ModelFamily.ARIMA),
         ModelSpec(ModelFamily.LSTM, REDUCED_NETWORK, seed=0)]
reports = []
with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    for spec in specs:
        reports.append(run_cv(series, spec, folds))

for r in reports:
    print(f"{r.model.family.value:7s} MAE {r.mean_mae:6.2f} ± {r.std_mae:5.2f}   "
          f"RMSE {r.mean_rmse:6.2f} ± {r.std_rmse:5.2f}")

# %% [markdown]
# Business-day view of the same folds.

# %%
for r in reports:
    print(r.model.family.value, r.business_summary())

# %%
fig, ax = plt.subplots(figsize=(6, 3))
names = [r.model.family.value for r in reports]
ax.bar(names, [r.mean_rmse for r in reports], yerr=[r.std_rmse for r in reports], capsize=4)
ax.set_ylabel("mean RMSE over folds")

# %% [markdown]
# Fold 0 forecasts against the held-out week.

# %%
fig, ax = plt.subplots(figsize=(10, 3))
ax.plot(reports[0].per_fold[0].actual, c="k", lw=1, label="actual")
for r in reports:
    ax.plot(r.per_fold[0].predicted, lw=1, label=r.model.family.value)
ax.legend()
plt.show()
