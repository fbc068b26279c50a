from podium.harness.bots import (
    Bot,
    BotSpec,
    BrowserBot,
    FullBodyBot,
    HeadsetBot,
    ObserverBot,
    SimServer,
)
from podium.harness.metrics import MetricsCollector, RunMetrics, TruthLog, percentile
from podium.harness.netsim import Link, NetworkConditions, VirtualLoop
from podium.harness.recorder import RoomRecorder, load_input_trace, replay
from podium.harness.scenarios import (
    SCENARIO_NAMES,
    ScenarioAssertionFailed,
    ScenarioResult,
    run_scenario,
)
from podium.harness.traces import (
    MotionTrace,
    TraceError,
    TraceSampler,
    generate_bundle,
    load_bundle,
    load_or_generate,
    save_bundle,
    write_canonical,
)
