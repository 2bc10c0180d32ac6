import json
import time
from pathlib import Path
from typing import Any, Dict, List, Optional


class RunReport:
    """
    Builds the structured JSON report of one training or evaluation run.

    The structure is filled in incrementally as the run progresses and written
    once at the end with :meth:`save_report`.
    """

    def __init__(self, run_name: Optional[str] = None, command: Optional[str] = None):
        """
        Initialize the report with basic run information.

        Args:
            run_name: Name of the run (usually the output directory name)
            command: CLI command that produced the run
        """
        self.start_time = time.time()

        self.data = {
            "run": run_name,
            "command": command,
            "seed": None,
            "preset": None,
            "variant": None,

            "config": {},

            "model": {
                "pairing": None,
                "fusion_mode": None,
                "parameter_counts": {}
            },

            "data": {
                "dataset_size": None,
                "labeled": None,
                "unlabeled": None,
                "val_size": None,
                "ratio": None
            },

            "training": {
                "total_iters": None,
                "iterations_done": None,
                "epochs": None,
                "final_losses": {}
            },

            "evaluations": [],

            "final_metrics": {
                "miou_junior": None,
                "miou_senior": None,
                "iou_per_class": []
            },

            "failure": None,
            "elapsed_time": None
        }

    def update_run_info(self, seed: int, preset: Optional[str] = None, variant: Optional[str] = None):
        """Update seed and ablation identifiers."""
        self.data["seed"] = seed
        self.data["preset"] = preset
        self.data["variant"] = variant

    def update_config(self, flat_config: Dict[str, Any]):
        """Record the resolved configuration as flat key/value pairs."""
        self.data["config"] = dict(flat_config)

    def update_model_info(self, pairing: str, fusion_mode: str, parameter_counts: Dict[str, int]):
        self.data["model"]["pairing"] = pairing
        self.data["model"]["fusion_mode"] = fusion_mode
        self.data["model"]["parameter_counts"] = dict(parameter_counts)

    def update_data_info(self, dataset_size: int, labeled: int, unlabeled: int, val_size: int, ratio: str):
        self.data["data"].update(
            dataset_size=dataset_size, labeled=labeled, unlabeled=unlabeled, val_size=val_size, ratio=ratio
        )

    def update_training(self, total_iters: int, iterations_done: int, epochs: int, final_losses: Dict[str, float]):
        self.data["training"].update(
            total_iters=total_iters, iterations_done=iterations_done, epochs=epochs, final_losses=dict(final_losses)
        )

    def add_evaluation(self, iteration: int, epoch: int, miou_junior: float, miou_senior: Optional[float] = None):
        """Append one periodic evaluation result."""
        self.data["evaluations"].append(
            {"iter": iteration, "epoch": epoch, "miou_junior": miou_junior, "miou_senior": miou_senior}
        )

    def update_final_metrics(self, miou_junior: float, iou_per_class: List[Optional[float]], miou_senior: Optional[float] = None):
        self.data["final_metrics"]["miou_junior"] = miou_junior
        self.data["final_metrics"]["miou_senior"] = miou_senior
        self.data["final_metrics"]["iou_per_class"] = list(iou_per_class)

    def record_failure(self, error: BaseException):
        """Keep the error type and message of a run that did not finish."""
        self.data["failure"] = {"type": type(error).__name__, "message": str(error)}

    def save_report(self, output_dir: Path, filename: str = "run_report.json") -> Path:
        """
        Save the JSON report to the output directory.

        Args:
            output_dir: Directory where to save the report
            filename: Report file name

        Returns:
            Path of the written file
        """
        self.data["elapsed_time"] = time.time() - self.start_time
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        file_path = output_dir / filename
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(self.data, f, indent=2, ensure_ascii=False)
        return file_path

