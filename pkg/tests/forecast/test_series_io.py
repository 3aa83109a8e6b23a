"""Tests for series CSV files and demand extraction."""

import numpy as np
import pytest

from scripts.forecast.series_io import episode_demand, read_series, write_series


def test_write_then_read(tmp_path):
    path = write_series(tmp_path / 'out' / 'demand.csv', [1.5, 2.25, 0.0], start=10)
    assert path.read_text().splitlines()[:2] == ['time_index,value', '10,1.500000']
    np.testing.assert_allclose(read_series(path), [1.5, 2.25, 0.0])


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_series(tmp_path / 'nope.csv')


@pytest.mark.parametrize(
    'content',
    [
        'hour,value\n0,1.0\n',
        'time_index,value\n0,abc\n',
        'time_index,value\n1,1.0\n0,2.0\n',
    ],
)
def test_malformed_files_rejected(tmp_path, content):
    path = tmp_path / 'bad.csv'
    path.write_text(content)
    with pytest.raises(ValueError):
        read_series(path)


def test_episode_demand_is_hourly_gallons(short_run):
    demand, exo = episode_demand(short_run.episode)
    records = short_run.episode.hourly_records
    assert demand.shape == (len(records),) == (72,)
    assert demand[5] == records[5].gallons_sold_mgal / 1000.0
    assert exo[5] == records[5].exo
