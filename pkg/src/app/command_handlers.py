"""
Command handlers for the polarfuse CLI.

Each ``handle_*`` method runs one subcommand from a resolved ``RunConfig``,
writes its artifacts and prints a short summary. Errors propagate to the
CLI, which maps them to exit codes.
"""

import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple

from src.app.run_config import RunConfig
from src.constants import (
    ABLATION_NO_PPFT,
    AGGREGATE_ROW,
    CHECKPOINT_FILE,
    COMPARE_COLUMNS,
    COMPARE_FILE,
    DECODE_DONE,
    DEFAULT_OUT,
    EFFECTIVE_CONFIG_FILE,
    ERROR_MAP_DIR,
    EVAL_DONE,
    FOUNDATION_FILE,
    FOUNDATION_MISSING,
    INTRINSICS_FILE,
    LOSS_LOG_COLUMNS,
    LOSS_LOG_FILE,
    METRICS_COLUMNS,
    METRICS_FILE,
    NORMAL_METRICS_COLUMNS,
    NORMAL_METRICS_FILE,
    POINTCLOUD_DONE,
    PRETRAIN_DONE,
    SIMULATE_DONE,
    TRAIN_DONE,
)
from src.core.camera import viewing_field
from src.core.guidance import build_guidance
from src.core.polarization import DofpCapture, decode_dofp
from src.errors import ConfigError, CorruptFileError, DomainError
from src.evaluation.metrics import (
    normal_angles,
    pooled_depth_table,
    pooled_normal_table,
)
from src.evaluation.pointcloud import (
    backproject,
    depth_to_normals,
    error_map,
    write_ply,
)
from src.managers.archive_manager import (
    WeightArchive,
    load_archive,
    save_archive,
)
from src.managers.config_manager import write_key_values
from src.managers.dataset_manager import (
    DatasetManager,
    TrainingSample,
    read_intrinsics,
)
from src.managers.run_log_manager import RunLogManager
from src.managers.tensor_file_manager import read_tensor, write_tensor
from src.model.config import ModelConfig
from src.model.depth_map import DepthMap
from src.model.network import enhance, init_params
from src.model.pretrained import FreezePolicy, load_pretrained, restore_params
from src.model.training import OptimizerState, Trainer
from src.numerics.params import ParamStore
from src.simulate.dataset import dataset
from src.simulate.degrade import DegradationSampler
from src.simulate.scene import SceneSampler
from src.utils.display_utils import (
    format_compare_table,
    format_depth_table,
    format_normal_table,
)

logger = logging.getLogger(__name__)


def run_label(path: str) -> str:
    """
    Name of the run a metrics file belongs to.

    ``runs/ppft/eval/metrics.csv`` and ``runs/ppft/metrics.csv`` are both
    labelled ``ppft``.
    """
    folder = os.path.dirname(os.path.abspath(path))
    if os.path.basename(folder) == os.path.basename(DEFAULT_OUT["eval"]):
        folder = os.path.dirname(folder)
    return os.path.basename(folder) or path


class CommandHandlers:
    """Runs the subcommands of the polarfuse CLI."""

    def __init__(self, config: RunConfig):
        """Initialize with the resolved settings of this invocation."""
        self.config = config

    def run(self) -> None:
        """Dispatch to the handler of ``config.command``."""
        handlers = {
            "decode": self.handle_decode,
            "simulate": self.handle_simulate,
            "pretrain": self.handle_pretrain,
            "train": self.handle_train,
            "eval": self.handle_eval,
            "pointcloud": self.handle_pointcloud,
            "compare": self.handle_compare,
        }
        handlers[self.config.command]()

    def _output_dir(self) -> str:
        """Create the output directory and echo the effective config into it."""
        out = self.config.out or DEFAULT_OUT[self.config.command]
        self._echo_config(out)
        return out

    def _echo_config(self, out: str) -> None:
        os.makedirs(out, exist_ok=True)
        write_key_values(
            os.path.join(out, EFFECTIVE_CONFIG_FILE), self.config.to_dict()
        )

    def _require(self, key: str) -> str:
        value = getattr(self.config, key)
        if not value:
            raise ConfigError(f"'{self.config.command}' needs --{key}")
        return value

    def _dataset(self) -> DatasetManager:
        return DatasetManager(self._require("data"))

    def _checkpoint(self, model: ModelConfig) -> ParamStore:
        return restore_params(load_archive(self._require("checkpoint")), model)

    def _optimizer(self) -> OptimizerState:
        return OptimizerState(
            learning_rate=self.config.lr, clip_norm=self.config.clip_norm
        )

    def _fit(
        self, model: ModelConfig, params: ParamStore, out: str
    ) -> Tuple[ParamStore, List[float]]:
        samples = [s.batch() for s in self._dataset().load_all()]
        log = RunLogManager(os.path.join(out, LOSS_LOG_FILE), LOSS_LOG_COLUMNS)
        trainer = Trainer(model, self._optimizer(), log, self.config.log_every)
        params, history = trainer.fit(
            params, samples, self.config.steps, seed=self.config.seed
        )
        log.save()
        return params, history

    def handle_decode(self) -> None:
        """Decode a DoFP capture into polarization state and guidance files."""
        source = self._require("input")
        capture = DofpCapture(read_tensor(source))
        intrinsics_path = self.config.intrinsics or os.path.join(
            os.path.dirname(source), INTRINSICS_FILE
        )
        if not os.path.isfile(intrinsics_path):
            raise FileNotFoundError(f"intrinsics file not found: {intrinsics_path}")
        intrinsics = read_intrinsics(intrinsics_path)
        _, state = decode_dofp(capture)
        guidance = build_guidance(
            state, viewing_field(intrinsics, capture.height, capture.width)
        )

        prefix = self.config.out or os.path.splitext(source)[0]
        self._echo_config(os.path.dirname(prefix) or ".")
        outputs = {
            "intensity": state.intensity,
            "aolp": state.aolp,
            "dolp": state.dolp,
            "guidance": guidance.data,
        }
        for name, raster in outputs.items():
            write_tensor(f"{prefix}_{name}.pft", raster)
        print(DECODE_DONE.format(prefix))

    def handle_simulate(self) -> None:
        """Render, degrade and store a synthetic dataset."""
        out = self._output_dir()
        scenes = SceneSampler(
            height=self.config.resolution,
            width=self.config.resolution,
            noise_sigma=self.config.noise,
        )
        degradations = DegradationSampler(modes=self.config.degradations)
        dataset(self.config.scenes, scenes, degradations, self.config.seed, out)
        print(SIMULATE_DONE.format(self.config.scenes, out))

    def handle_pretrain(self) -> None:
        """Train the backbone without fusion blocks on intensity guidance."""
        out = self._output_dir()
        model = ModelConfig.for_foundation(
            widths=self.config.widths, dropout_p=self.config.dropout
        )
        params = init_params(model, self.config.seed)
        params, _ = self._fit(model, params, out)
        path = os.path.join(out, FOUNDATION_FILE)
        save_archive(path, WeightArchive.from_params(params))
        print(PRETRAIN_DONE.format(path))

    def handle_train(self) -> None:
        """Train the enhancement network in the configured ablation mode."""
        out = self._output_dir()
        model = self.config.model_config()
        params = init_params(model, self.config.seed)
        archive = WeightArchive({})
        if self.config.ablation != ABLATION_NO_PPFT:
            if self.config.foundation:
                archive = load_archive(self.config.foundation)
            else:
                print(FOUNDATION_MISSING.format(self.config.ablation))
        load_pretrained(params, archive, FreezePolicy.from_config(model))

        params, history = self._fit(model, params, out)
        path = os.path.join(out, CHECKPOINT_FILE)
        save_archive(path, WeightArchive.from_params(params))
        print(TRAIN_DONE.format(path, history[-1] if history else float("nan")))

    def _predict(
        self, sample: TrainingSample, model: ModelConfig, params: Optional[ParamStore]
    ) -> DepthMap:
        source = self.config.source
        if source == "gt":
            return sample.gt
        if source == "sensor":
            return sample.sensor
        return enhance(sample.guidance, sample.sensor, params, model)

    def handle_eval(self) -> None:
        """Score predictions per degradation mode and write the metric tables."""
        out = self._output_dir()
        manager = self._dataset()
        intrinsics = manager.read_intrinsics()
        model = self.config.model_config()
        params = self._checkpoint(model) if self.config.source == "model" else None
        if self.config.error_maps:
            os.makedirs(os.path.join(out, ERROR_MAP_DIR), exist_ok=True)

        depth_rows = []
        angle_rows = []
        for sample in manager.load_all():
            pred = self._predict(sample, model, params)
            depth_rows.append((sample.mode, pred, sample.gt))
            normals, mask = depth_to_normals(pred, intrinsics)
            mask &= sample.gt.valid
            angle_rows.append(
                (sample.mode, normal_angles(normals, sample.normals, mask))
            )
            if self.config.error_maps:
                write_tensor(
                    os.path.join(out, ERROR_MAP_DIR, f"{sample.index:05d}_error.pft"),
                    error_map(pred, sample.gt),
                )

        table = pooled_depth_table(depth_rows, self.config.threshold_base)
        self._write_table(os.path.join(out, METRICS_FILE), METRICS_COLUMNS, table)
        print(format_depth_table(table))
        if any(angles.size for _, angles in angle_rows):
            normal_table = pooled_normal_table(angle_rows)
            self._write_table(
                os.path.join(out, NORMAL_METRICS_FILE),
                NORMAL_METRICS_COLUMNS,
                normal_table,
            )
            print(format_normal_table(normal_table))
        else:
            logger.warning("no pixel has both a predicted and a true normal")
        print(EVAL_DONE.format(out))

    @staticmethod
    def _write_table(path: str, columns: Sequence[str], rows: Sequence) -> None:
        log = RunLogManager(path, columns)
        for mode, metrics in rows:
            log.append(metrics.as_row(mode))
        log.save()

    def handle_pointcloud(self) -> None:
        """Export sensor, ground-truth and (with a checkpoint) predicted points."""
        out = self._output_dir()
        manager = self._dataset()
        rows = [
            r for r in manager.read_manifest() if int(r["index"]) == self.config.index
        ]
        if not rows:
            raise DomainError(f"no sample with index {self.config.index}")
        sample = manager.load_sample(rows[0])
        intrinsics = manager.read_intrinsics()

        clouds: Dict[str, DepthMap] = {"sensor": sample.sensor, "gt": sample.gt}
        if self.config.checkpoint:
            model = self.config.model_config()
            params = self._checkpoint(model)
            clouds["pred"] = enhance(sample.guidance, sample.sensor, params, model)
        else:
            logger.warning("no checkpoint given; skipping the predicted cloud")
        paths = []
        for name, depth in clouds.items():
            path = os.path.join(out, f"{sample.index:05d}_{name}.ply")
            write_ply(path, backproject(depth, intrinsics))
            paths.append(path)
        print(POINTCLOUD_DONE.format(", ".join(paths)))

    def handle_compare(self) -> None:
        """Aggregate RMSE/MAE of several runs against the first one."""
        if not self.config.runs:
            raise ConfigError("compare needs at least one metrics file")
        runs = []
        for path in self.config.runs:
            rows = [
                r for r in RunLogManager.load(path) if r.get("mode") == AGGREGATE_ROW
            ]
            if not rows:
                raise CorruptFileError(path, "mode", f"no '{AGGREGATE_ROW}' row")
            try:
                rmse, mae = float(rows[0]["rmse"]), float(rows[0]["mae"])
            except (KeyError, TypeError, ValueError):
                raise CorruptFileError(path, "rmse", "not a number") from None
            label = run_label(path)
            runs.append((label, rmse, mae))

        if self.config.out:
            self._echo_config(self.config.out)
            log = RunLogManager(
                os.path.join(self.config.out, COMPARE_FILE), COMPARE_COLUMNS
            )
            base_rmse, base_mae = runs[0][1], runs[0][2]
            for label, rmse, mae in runs:
                log.append(
                    {
                        "run": label,
                        "rmse": rmse,
                        "mae": mae,
                        "d_rmse": rmse - base_rmse,
                        "d_mae": mae - base_mae,
                    }
                )
            log.save()
        print(format_compare_table(runs))
