"""Daily report aggregation over session records."""

import pytest

from smartchair import SessionRecord, daily_report


def record(chair=1, start=0.0, end=600.0, history=None, state_secs=None, red=0, long_eps=0):
    return SessionRecord(
        chair_id=chair,
        start_time=start,
        end_time=end,
        sitting_history=history or [],
        state_secs=state_secs or {"green": 0.0, "orange": 0.0, "red": 0.0},
        long_sitting_episodes=long_eps,
        red_episodes=red,
    )


def test_empty_input_gives_empty_report():
    report = daily_report([])
    assert report.session_count == 0
    assert report.total_seated_secs == 0.0
    assert report.longest_sit_secs == 0.0
    assert report.state_secs == {"green": 0.0, "orange": 0.0, "red": 0.0}


def test_single_all_green_session():
    rec = record(
        start=1000.0,
        end=1600.0,
        history=[{"timestamp": 1000.0, "sitting_status": 1}],
        state_secs={"green": 600.0, "orange": 0.0, "red": 0.0},
    )
    report = daily_report([rec])
    assert report.state_secs == {"green": 600.0, "orange": 0.0, "red": 0.0}
    assert report.total_seated_secs == 600.0
    assert report.longest_sit_secs == 600.0
    assert report.red_episodes == 0


def test_transition_list_hand_simulation():
    # sit@t0, stand@t0+100, sit@t0+200, session ends t0+300:
    # seated spans = [t0, t0+100) and [t0+200, t0+300) -> total 200, longest 100
    t0 = 5000.0
    rec = record(
        start=t0,
        end=t0 + 300,
        history=[
            {"timestamp": t0, "sitting_status": 1},
            {"timestamp": t0 + 100, "sitting_status": 0},
            {"timestamp": t0 + 200, "sitting_status": 1},
        ],
        state_secs={"green": 200.0, "orange": 0.0, "red": 0.0},
    )
    report = daily_report([rec])
    assert report.total_seated_secs == 200.0
    assert report.longest_sit_secs == 100.0
    assert report.total_session_secs == 300.0


def test_two_sessions_totals_are_additive():
    a = record(
        start=0.0,
        end=600.0,
        history=[{"timestamp": 0.0, "sitting_status": 1}],
        state_secs={"green": 500.0, "orange": 100.0, "red": 0.0},
        red=0,
    )
    b = record(
        start=1000.0,
        end=1400.0,
        history=[{"timestamp": 1000.0, "sitting_status": 1}],
        state_secs={"green": 100.0, "orange": 100.0, "red": 200.0},
        red=2,
        long_eps=1,
    )
    single_a, single_b = daily_report([a]), daily_report([b])
    both = daily_report([a, b])
    assert both.session_count == 2
    assert both.total_seated_secs == single_a.total_seated_secs + single_b.total_seated_secs
    for name in ("green", "orange", "red"):
        assert both.state_secs[name] == single_a.state_secs[name] + single_b.state_secs[name]
    assert both.red_episodes == 2
    assert both.long_sitting_episodes == 1
    assert both.longest_sit_secs == max(single_a.longest_sit_secs, single_b.longest_sit_secs)


def test_mixed_chairs_rejected():
    with pytest.raises(ValueError, match="chair"):
        daily_report([record(chair=1), record(chair=2)])


def test_record_roundtrip_through_dict():
    rec = record(
        start=10.0,
        end=20.0,
        history=[{"timestamp": 10.0, "sitting_status": 1}],
        state_secs={"green": 10.0, "orange": 0.0, "red": 0.0},
        red=1,
    )
    assert SessionRecord.from_dict(rec.to_dict()) == rec
