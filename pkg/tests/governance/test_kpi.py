"""Tests for KPI reports over an episode log."""

import pytest

from scripts.governance.kpi import (
    KPI_COLUMNS,
    KPI_FIELD_NAMES,
    KpiReport,
    emit_kpi_report,
    format_kpi_table,
    kpi_frame,
    read_kpi_csv,
    write_kpi_csv,
)
from scripts.monitor.alerts import AlertKind, Severity, make_alert

_NON_ADDITIVE = {'start', 'end', 'tank_mgal'}


def test_single_hour_report_matches_its_record(short_run):
    record = short_run.episode.hourly_records[5]
    report = emit_kpi_report(short_run.episode, 5, 6)
    assert report.margin_cents == record.revenue_cents - record.cost_cents
    assert report.sold_mgal == record.gallons_sold_mgal
    assert report.stockouts == record.turned_away
    assert report.hold_cents == record.holding_cents
    assert report.tank_mgal == record.tank_level_mgal


def test_reports_over_a_partition_add_up(short_run):
    episode = short_run.episode
    whole = emit_kpi_report(episode, 0, episode.n_hours)
    parts = [emit_kpi_report(episode, s, s + 12) for s in range(0, episode.n_hours, 12)]
    for name in KPI_FIELD_NAMES:
        if name in _NON_ADDITIVE:
            continue
        assert getattr(whole, name) == sum(getattr(p, name) for p in parts), name
    assert whole.tank_mgal == parts[-1].tank_mgal == episode.final_tank_mgal


def test_daily_rows_add_up_to_the_episode(short_run):
    episode = short_run.episode
    rows = episode.kpi_rows
    assert [(r.start, r.end) for r in rows] == [(0, 24), (24, 48), (48, 72)]
    whole = emit_kpi_report(episode, 0, episode.n_hours)
    for name in KPI_FIELD_NAMES:
        if name not in _NON_ADDITIVE:
            assert getattr(whole, name) == sum(getattr(r, name) for r in rows), name


@pytest.mark.parametrize('start, end', [(5, 5), (6, 5), (-1, 3), (0, 73)])
def test_bad_periods_rejected(short_run, start, end):
    with pytest.raises(ValueError):
        emit_kpi_report(short_run.episode, start, end)


class TestDerivedFields:
    def test_ratios(self):
        report = KpiReport(
            start=0, end=24, margin_cents=12_345, sold_mgal=2_500_000, hold_cents=40,
            fsq_mgal2=8_000_000, fpts=2, baskets=3, fuel_visits=12, chk_ms=90_000, chk_n=15, tank_mgal=1_500,
        )
        assert report.total_margin == pytest.approx(123.45)
        assert report.gallons_sold == 2500.0
        assert report.holding_cost_total == 0.4
        assert report.forecast_mse == pytest.approx(4.0)
        assert report.attach_rate == 0.25
        assert report.mean_checkout_seconds == 6.0
        assert report.end_tank_level == 1.5

    def test_empty_period_ratios_are_zero(self):
        report = KpiReport(start=0, end=1)
        assert (report.forecast_mse, report.attach_rate, report.mean_checkout_seconds) == (0.0, 0.0, 0.0)

    def test_with_alerts_counts_by_kind(self):
        alerts = [
            make_alert(AlertKind.LEAK, 'tank-1', Severity.URGENT, 3, 'x'),
            make_alert(AlertKind.TIRE, 'vehicle-1', Severity.ADVISORY, 4, 'x'),
            make_alert(AlertKind.TIRE, 'vehicle-2', Severity.ADVISORY, 5, 'x'),
        ]
        report = KpiReport(start=0, end=24, a_tire=1).with_alerts(alerts)
        assert report.alerts_by_kind[AlertKind.LEAK] == 1
        assert report.alerts_by_kind[AlertKind.TIRE] == 3
        assert report.to_row()['alerts_by_kind'] == 'leak=1;vibration_fault=0;battery=0;tire=3;fraud=0'

    def test_wire_fields_follow_declaration_order(self):
        assert tuple(KpiReport(start=0, end=1).wire_fields()) == KPI_FIELD_NAMES


class TestFiles:
    def test_write_then_read(self, tmp_path, short_run):
        path = write_kpi_csv(tmp_path / 'kpi.csv', short_run.episode.kpi_rows)
        frame = read_kpi_csv(path)
        assert list(frame.columns) == KPI_COLUMNS
        assert frame['period_start'].tolist() == [0, 24, 48]
        assert frame['fuel_visits'].tolist() == [r.fuel_visits for r in short_run.episode.kpi_rows]

    def test_wrong_columns_rejected(self, tmp_path):
        path = tmp_path / 'kpi.csv'
        path.write_text('a,b\n1,2\n')
        with pytest.raises(ValueError):
            read_kpi_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_kpi_csv(tmp_path / 'kpi.csv')

    def test_text_table(self, short_run):
        text = format_kpi_table(kpi_frame(short_run.episode.kpi_rows))
        assert text.splitlines()[0].split() == KPI_COLUMNS
        assert len(text.splitlines()) == 4
        assert format_kpi_table(kpi_frame([])) == '(no KPI rows)'
