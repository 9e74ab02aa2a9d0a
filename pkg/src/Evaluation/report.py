"""
Report Module

This module aggregates per-record metrics into the evaluation table: one row
per protocol and method, one PSNR and one SSIM column (mean ± std) per
acceleration factor. The same numbers are rendered as aligned text and as a
JSON document.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from Evaluation.metrics import psnr, ssim
from Networks.cascade import DCCNN, DPOCSENSE, VARIANT_LABELS
from Reconstruction.reconstructor import Reconstruction

PSNR_DECIMALS = 2
SSIM_DECIMALS = 2
REPORT_FORMAT_VERSION = 1


@dataclass
class RecordMetrics:
    record_id: str
    protocol: str
    psnr: float
    ssim: float


@dataclass
class MetricSummary:
    """Mean and standard deviation of one metric over a group of records."""
    mean: float
    std: float
    count: int

    @classmethod
    def from_values(cls, values: List[float]) -> "MetricSummary":
        array = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            return cls(math.inf, 0.0, len(values))
        return cls(float(array.mean()), float(array.std()), len(values))

    def format(self, decimals: int) -> str:
        if math.isinf(self.mean):
            return "inf"
        return f"{self.mean:.{decimals}f} ± {self.std:.{decimals}f}"

    def to_json(self, decimals: int) -> Dict[str, Any]:
        if math.isinf(self.mean):
            return {'mean': "inf", 'std': round(self.std, decimals), 'count': self.count}
        return {'mean': round(self.mean, decimals), 'std': round(self.std, decimals), 'count': self.count}


def evaluate_reconstructions(reconstructions: List[Reconstruction]) -> List[RecordMetrics]:
    """PSNR and SSIM of every reconstruction against its reference, inside the map support."""
    return [
        RecordMetrics(recon.record_id, recon.protocol,
                      psnr(recon.image, recon.reference, recon.support),
                      ssim(recon.image, recon.reference, recon.support))
        for recon in reconstructions
    ]


def _af_key(af: Optional[float]) -> str:
    if af is None:
        return "stored"
    return f"{af:g}"


@dataclass
class EvaluationReport:
    """
    The per-protocol evaluation table.

    Attributes:
        cells (Dict[Tuple[str, str, str], Tuple[MetricSummary, MetricSummary]]):
            (protocol, method label, AF key) -> (PSNR, SSIM) summaries.
        afs (List[str]): AF column keys, in insertion order.
        methods (List[str]): Method labels, in insertion order.
    """
    cells: Dict[Tuple[str, str, str], Tuple[MetricSummary, MetricSummary]] = field(default_factory=dict)
    afs: List[str] = field(default_factory=list)
    methods: List[str] = field(default_factory=list)

    def add(self, label: str, af: Optional[float], metrics: List[RecordMetrics]):
        """Add the metrics of one method at one acceleration, grouped by protocol."""
        af_key = _af_key(af)
        if af_key not in self.afs:
            self.afs.append(af_key)
        if label not in self.methods:
            self.methods.append(label)
        for protocol in sorted({m.protocol for m in metrics}):
            group = [m for m in metrics if m.protocol == protocol]
            self.cells[(protocol, label, af_key)] = (
                MetricSummary.from_values([m.psnr for m in group]),
                MetricSummary.from_values([m.ssim for m in group]),
            )

    def protocols(self) -> List[str]:
        return sorted({protocol for protocol, _, _ in self.cells})

    def rows(self) -> List[Tuple[str, str]]:
        return [(protocol, label) for protocol in self.protocols() for label in self.methods
                if any((protocol, label, af) in self.cells for af in self.afs)]

    def mean_psnr(self, label: str, af_key: str) -> Optional[float]:
        """Record-weighted mean PSNR of a method over all protocols at one AF."""
        summaries = [cell[0] for (_, cell_label, cell_af), cell in self.cells.items()
                     if cell_label == label and cell_af == af_key]
        if not summaries:
            return None
        total = sum(s.count for s in summaries)
        return sum(s.mean * s.count for s in summaries) / total

    def variant_ordering(self) -> Dict[str, str]:
        """For every AF where both cascades were evaluated, which one has the higher mean PSNR."""
        first, second = VARIANT_LABELS[DPOCSENSE], VARIANT_LABELS[DCCNN]
        ordering = {}
        for af_key in self.afs:
            a, b = self.mean_psnr(first, af_key), self.mean_psnr(second, af_key)
            if a is None or b is None:
                continue
            if a == b:
                ordering[af_key] = f"{first} = {second}"
            else:
                ordering[af_key] = f"{first} > {second}" if a > b else f"{second} > {first}"
        return ordering

    def to_json(self) -> Dict[str, Any]:
        rows = []
        for protocol, label in self.rows():
            columns = {}
            for af_key in self.afs:
                if (protocol, label, af_key) in self.cells:
                    psnr_summary, ssim_summary = self.cells[(protocol, label, af_key)]
                    columns[af_key] = {
                        'psnr': psnr_summary.to_json(PSNR_DECIMALS),
                        'ssim': ssim_summary.to_json(SSIM_DECIMALS),
                    }
            rows.append({'protocol': protocol, 'method': label, 'af': columns})
        return {
            'format_version': REPORT_FORMAT_VERSION,
            'afs': list(self.afs),
            'rows': rows,
            'ordering': self.variant_ordering(),
        }

    def to_text(self) -> str:
        header = ["Protocol", "Method"]
        for af_key in self.afs:
            header.extend([f"PSNR AF={af_key}", f"SSIM AF={af_key}"])
        table = [header]
        for protocol, label in self.rows():
            line = [protocol, label]
            for af_key in self.afs:
                cell = self.cells.get((protocol, label, af_key))
                if cell is None:
                    line.extend(["-", "-"])
                else:
                    line.extend([cell[0].format(PSNR_DECIMALS), cell[1].format(SSIM_DECIMALS)])
            table.append(line)

        widths = [max(len(line[i]) for line in table) for i in range(len(header))]
        lines = ["  ".join(value.ljust(width) for value, width in zip(line, widths)).rstrip() for line in table]
        lines.insert(1, "  ".join("-" * width for width in widths))
        for af_key, order in self.variant_ordering().items():
            lines.append(f"AF={af_key}: {order} (mean PSNR)")
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.to_text()
