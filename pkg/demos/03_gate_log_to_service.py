# %% [markdown]
# # From gate events to a served forecast
#
# Generate a gate-event log, aggregate it into hourly stock per category,
# fit a model, store the artifact and query it the way the booking system
# would.

# %%
import json
import tempfile
from pathlib import Path

from ecforecast.artifacts import artifact_path, save_artifact
from ecforecast.forecaster import fit
from ecforecast.ingest import category_totals, parse_event_log
from ecforecast.models.arima import ArimaOrder
from ecforecast.models.base import ModelFamily, ModelSpec
from ecforecast.series import CalendarSpec, make_hourly_index
from ecforecast.service import ArtifactStore, handle_request
from ecforecast.synth import SynthSpec, generate_event_log

spec = SynthSpec(start="2024-01-01T00:00", end="2024-03-04T00:00", base_level=300.0,
                 weekly_amp=30.0, daily_amp=50.0, seed=7)
log = generate_event_log(spec, mean_dwell_hours=12.0)
print(len(log), "gate events")
print(log.to_csv().splitlines()[:4])

# %% [markdown]
# The CSV round trip is what the `ingest` command does.

# %%
log = parse_event_log(log.to_csv(), observation_end=log.observation_end)
index = make_hourly_index(spec.start, spec.end)
stocks = category_totals(log, index)
for cat, s in stocks.items():
    print(f"{cat.value:8s} mean {s.values.mean():7.1f}  max {s.values.max()}")

# %%
store_dir = Path(tempfile.mkdtemp())
standard = next(s for c, s in stocks.items() if c.value == "standard")
model = fit(ModelSpec(ModelFamily.ARIMA, ArimaOrder(2, 1, 2)), standard)
save_artifact(model, artifact_path(store_dir, "standard", "arima"), standard)

# %%
store = ArtifactStore(store_dir, CalendarSpec())
status, body = handle_request("/v1/forecast?category=standard&days=5&model=arima", store)
doc = json.loads(body)
print(status, doc["horizon_hours"], "hours,", doc["business_hours"], "on business days")
print(doc["points"][:3])
