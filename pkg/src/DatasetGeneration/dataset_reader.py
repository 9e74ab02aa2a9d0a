"""
Dataset Reader Module

This module reads dataset directories written by the dataset writer back into
DatasetRecord objects. Every format problem is reported with its own error kind:
an unparsable or incomplete header, a truncated payload, or a foreign
format/version.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from tqdm import tqdm

from exceptions import InvalidArgumentError, MalformedHeaderError, TruncatedPayloadError
from DatasetGeneration.dataset_entities import Dataset, DatasetRecord
from DatasetGeneration.dataset_schema import (
    INDEX_FILE,
    KSPACE_FILE,
    META_FILE,
    SENS_FILE,
    check_format_tag,
    check_record_id,
    decode_complex,
    validate_record_header
)
from Operators.coils import SensitivityMaps
from Operators.sampling import SamplingMask


class DatasetReader:
    """
    A reader for dataset directories.

    Attributes:
        dataset_dir (Path): Path to the dataset directory.
        dataset (Dataset): The parsed dataset.
    """

    def __init__(self, dataset_dir: str):
        """
        Initialize the DatasetReader with the path to the dataset directory.

        Args:
            dataset_dir (str): Path to the dataset directory.
        """
        self.dataset_dir = Path(dataset_dir)
        self.dataset = None

    def parse(self, show_progress: bool = False) -> Dataset:
        """
        Parse the dataset directory into a Dataset object.

        Args:
            show_progress (bool, optional): Whether to show a progress bar while reading.
                Defaults to False.

        Returns:
            Dataset: The parsed dataset.
        """
        index = self._read_json(self.dataset_dir / INDEX_FILE)
        if not isinstance(index, dict) or not isinstance(index.get('records'), list):
            raise MalformedHeaderError(f"{self.dataset_dir / INDEX_FILE}: missing record list")
        check_format_tag(index, str(self.dataset_dir / INDEX_FILE))

        source = str(self.dataset_dir / INDEX_FILE)
        record_ids = [check_record_id(record_id, source) for record_id in index['records']]
        if show_progress:
            print(f"Reading {len(record_ids)} records from {self.dataset_dir}...")
            record_ids = tqdm(record_ids, desc="Reading records", unit="record")

        records = [self.read_record(record_id) for record_id in record_ids]
        self.dataset = Dataset(records, index['format_version'])
        return self.dataset

    def read_record(self, record_id: str) -> DatasetRecord:
        """
        Read one record directory.

        Args:
            record_id (str): Identifier (and directory name) of the record.

        Returns:
            DatasetRecord: The record with complex64 payloads.
        """
        record_dir = self.dataset_dir / record_id
        header = validate_record_header(self._read_json(record_dir / META_FILE), str(record_dir / META_FILE))
        shape = (header['n_coil'], header['height'], header['width'])

        kspace = decode_complex(self._read_bytes(record_dir / KSPACE_FILE), shape, str(record_dir / KSPACE_FILE))
        maps = None
        if header['has_sens']:
            sens = decode_complex(self._read_bytes(record_dir / SENS_FILE), shape, str(record_dir / SENS_FILE))
            maps = SensitivityMaps(sens)

        try:
            mask = SamplingMask.from_metadata(header)
        except (InvalidArgumentError, TypeError) as e:
            raise MalformedHeaderError(f"{record_dir / META_FILE}: invalid sampled_lines ({e})")
        return DatasetRecord(header['record_id'], header['protocol'], kspace, mask, maps,
                             float(header['noise_sigma']), header['seed'])

    def get_metadata(self) -> Dict[str, Any]:
        """
        Get the metadata of the parsed dataset.

        Returns:
            Dict: Dataset metadata.
        """
        if not self.dataset:
            return {}

        return {
            'formatVersion': self.dataset.format_version,
            'recordCount': len(self.dataset),
            'protocols': self.dataset.protocols(),
        }

    def get_records(self) -> List[DatasetRecord]:
        if not self.dataset:
            return []
        return self.dataset.records

    def get_record_by_id(self, record_id: str) -> Optional[DatasetRecord]:
        if not self.dataset:
            return None
        return self.dataset.get_record_by_id(record_id)

    @staticmethod
    def _read_json(path: Path) -> Any:
        try:
            return json.loads(path.read_text(encoding='utf-8'))
        except FileNotFoundError:
            raise MalformedHeaderError(f"{path}: header file not found")
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise MalformedHeaderError(f"{path}: invalid JSON ({e})")

    @staticmethod
    def _read_bytes(path: Path) -> bytes:
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise TruncatedPayloadError(f"{path}: payload file not found")


def read_dataset(directory: str, show_progress: bool = False) -> List[DatasetRecord]:
    """Read every record of a dataset directory, ordered by record id."""
    reader = DatasetReader(directory)
    reader.parse(show_progress)
    return reader.get_records()
