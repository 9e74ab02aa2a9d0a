"""
Dataset Writer Module

This module writes records to the on-disk dataset format. A dataset is first
written to a temporary sibling directory and then renamed into place, so
readers never observe a partially written dataset.
"""

import json
import os
import shutil
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, List

from tqdm import tqdm

from DatasetGeneration.dataset_entities import DatasetRecord
from DatasetGeneration.dataset_schema import (
    BYTE_ORDER,
    FORMAT_NAME,
    FORMAT_VERSION,
    INDEX_FILE,
    KSPACE_FILE,
    META_FILE,
    SENS_FILE,
    encode_complex
)


class DatasetWriter:
    """Write dataset records into a dataset directory"""

    def __init__(self, output_dir: str, overwrite: bool = False):
        """
        Initialize the dataset writer.

        Args:
            output_dir: Directory that will hold the dataset.
            overwrite: Whether an existing dataset directory may be replaced.
        """
        self.output_dir = Path(output_dir)
        self.overwrite = overwrite

    def write(self, records: Iterable[DatasetRecord], show_progress: bool = False) -> Path:
        """
        Write all records and publish the dataset directory.

        Args:
            records: The records to write.
            show_progress: Whether to show a progress bar.

        Returns:
            Path: The published dataset directory.
        """
        records = sorted(records, key=lambda record: record.record_id)
        if self.output_dir.exists() and any(self.output_dir.iterdir()) and not self.overwrite:
            raise FileExistsError(f"Dataset directory {self.output_dir} already exists and is not empty")

        self.output_dir.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=f".{self.output_dir.name}-", dir=self.output_dir.parent))
        try:
            if show_progress:
                print(f"Writing {len(records)} records to {self.output_dir}...")
                records_iterator = tqdm(records, desc="Writing records", unit="record")
            else:
                records_iterator = records

            for record in records_iterator:
                self._write_record(staging, record)
            self._write_index(staging, [record.record_id for record in records])

            if self.output_dir.exists():
                shutil.rmtree(self.output_dir)
            os.replace(staging, self.output_dir)
        except BaseException:
            shutil.rmtree(staging, ignore_errors=True)
            raise
        return self.output_dir

    def _write_index(self, directory: Path, record_ids: List[str]):
        index = {
            'format': FORMAT_NAME,
            'format_version': FORMAT_VERSION,
            'byte_order': BYTE_ORDER,
            'records': record_ids,
        }
        (directory / INDEX_FILE).write_text(json.dumps(index, indent=2, sort_keys=True), encoding='utf-8')

    def _write_record(self, directory: Path, record: DatasetRecord):
        """
        Write one record directory.

        Args:
            directory: The staging dataset directory.
            record: The record to write.
        """
        record_dir = directory / record.record_id
        record_dir.mkdir()

        header = {
            'format': FORMAT_NAME,
            'format_version': FORMAT_VERSION,
            'byte_order': BYTE_ORDER,
            'created': datetime.now(timezone.utc).isoformat(),
            **record.to_metadata(),
        }
        (record_dir / META_FILE).write_text(json.dumps(header, indent=2, sort_keys=True), encoding='utf-8')
        (record_dir / KSPACE_FILE).write_bytes(encode_complex(record.kspace))
        if record.maps is not None:
            (record_dir / SENS_FILE).write_bytes(encode_complex(record.maps.maps))


def write_dataset(records: Iterable[DatasetRecord], directory: str, overwrite: bool = False,
                  show_progress: bool = False) -> Path:
    """Write records to ``directory`` (see DatasetWriter)."""
    return DatasetWriter(directory, overwrite).write(records, show_progress)
