import io
from datetime import datetime, time, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marketstates.errors import (
    EmptyOutputError,
    EmptyRangeError,
    InsufficientUniverseError,
    ParseError,
    ValidationError,
)
from marketstates.ingest import (
    PriceSeries,
    ReturnSeries,
    SessionWindow,
    align_universe,
    compute_returns,
    parse_price_table,
    read_returns_table,
    write_price_table,
    write_returns_table,
)

from conftest import dates


def test_parse_single_symbol():
    table = "date,symbol,price\n2020-01-02,A,100\n2020-01-03,A,110\n2020-01-06,A,99\n"
    (s,) = parse_price_table(table)
    assert s.symbol == "A"
    assert len(s) == 3
    assert s.prices.tolist() == [100, 110, 99]


def test_parse_groups_and_sorts_interleaved_rows():
    table = (
        "date,symbol,price\n"
        "2020-01-03,A,2\n2020-01-02,B,5\n2020-01-02,A,1\n2020-01-03,B,6\n2020-01-01,B,4\n"
    )
    a, b = parse_price_table(table)
    assert (a.symbol, b.symbol) == ("A", "B")
    assert a.prices.tolist() == [1, 2]
    assert b.prices.tolist() == [4, 5, 6]
    assert list(b.timestamps) == sorted(b.timestamps)


@pytest.mark.parametrize("price", ["0", "-3.5"])
def test_parse_rejects_non_positive_price(price):
    with pytest.raises(ValidationError, match="line 2"):
        parse_price_table(f"date,symbol,price\n2020-01-02,A,{price}\n")


def test_parse_rejects_duplicate_timestamp():
    with pytest.raises(ValidationError, match="duplicate"):
        parse_price_table("date,symbol,price\n2020-01-02,A,1\n2020-01-02,A,2\n")


@pytest.mark.parametrize(
    "body, line",
    [
        ("2020-01-02,A\n", 2),
        ("2020-01-02,A,1\n02/01/2020,A,1\n", 3),
        ("2020-01-02,A,1\n2020-01-03,A,1\n2020-01-04,A,abc\n", 4),
    ],
)
def test_parse_error_carries_line_number(body, line):
    with pytest.raises(ParseError) as info:
        parse_price_table("date,symbol,price\n" + body)
    assert info.value.line == line


def test_parse_intraday_timestamps():
    (s,) = parse_price_table("date,symbol,price\n2020-01-02T10:45:00,A,1\n2020-01-02T10:46:00,A,2\n")
    assert s.timestamps[1] == datetime(2020, 1, 2, 10, 46)


def test_price_series_invariants():
    with pytest.raises(ValidationError):
        PriceSeries("A", dates(2), [1.0])
    with pytest.raises(ValidationError):
        PriceSeries("A", dates(2)[::-1], [1.0, 2.0])


@pytest.mark.parametrize(
    "prices, expected",
    [([100, 110], [0.10]), ([100, 110, 99], [0.10, -0.10]), ([50, 50, 50], [0.0, 0.0])],
)
def test_daily_returns(prices, expected):
    r = compute_returns(PriceSeries("A", dates(len(prices)), prices))
    np.testing.assert_allclose(r.values, expected, rtol=0, atol=1e-15)
    assert r.timestamps == tuple(dates(len(prices))[:-1])


def test_returns_with_horizon_and_stride():
    p = [100.0, 101, 102, 103, 104, 105, 106]
    r = compute_returns(PriceSeries("A", dates(7), p), horizon=2, stride=3)
    # t at 0 and 3; t=6 has no endpoint
    np.testing.assert_allclose(r.values, [2 / 100, 2 / 103])
    assert len(r) == 2


def test_returns_need_one_value():
    with pytest.raises(EmptyOutputError):
        compute_returns(PriceSeries("A", dates(2), [1.0, 2.0]), horizon=5)


def _minute_series(day, start, end, step=1, skip=()):
    ts, ps = [], []
    t = datetime.combine(day, start)
    stop = datetime.combine(day, end)
    i = 0
    while t <= stop:
        if t not in skip:
            ts.append(t)
            ps.append(100.0 + i)
        t += timedelta(minutes=step)
        i += 1
    return ts, ps


def test_intraday_session_grid():
    day = datetime(2020, 3, 2).date()
    ts, ps = _minute_series(day, time(9, 30), time(16, 0))
    s = PriceSeries("A", ts, ps)
    r = compute_returns(s, timedelta(hours=1), timedelta(minutes=1), SessionWindow())
    # every minute from 10:45 to 14:45 inclusive
    assert len(r) == 4 * 60 + 1
    assert r.timestamps[0] == datetime(2020, 3, 2, 10, 45)
    assert r.timestamps[-1] == datetime(2020, 3, 2, 14, 45)
    i0 = ts.index(datetime(2020, 3, 2, 10, 45))
    assert r.values[0] == pytest.approx((ps[i0 + 60] - ps[i0]) / ps[i0])


def test_intraday_skips_missing_endpoints():
    day = datetime(2020, 3, 2).date()
    gap = {datetime(2020, 3, 2, 11, 50), datetime(2020, 3, 2, 11, 0)}
    ts, ps = _minute_series(day, time(9, 30), time(16, 0), skip=gap)
    r = compute_returns(PriceSeries("A", ts, ps), timedelta(hours=1), timedelta(minutes=1), SessionWindow())
    # 11:00 and 11:50 lack S(t); 10:50 lacks S(t + 1h)
    assert len(r) == 4 * 60 + 1 - 3
    for missing in (time(10, 50), time(11, 0), time(11, 50)):
        assert datetime.combine(day, missing) not in r.timestamps


def test_intraday_custom_session_and_stride():
    day = datetime(2020, 3, 2).date()
    ts, ps = _minute_series(day, time(9, 30), time(16, 0))
    session = SessionWindow.parse("10:00-11:00")
    r = compute_returns(PriceSeries("A", ts, ps), timedelta(minutes=30), timedelta(minutes=15), session)
    assert [t.time() for t in r.timestamps] == [time(10, 0), time(10, 15), time(10, 30), time(10, 45), time(11, 0)]


def _series(sym, n, skip=()):
    ts = [t for i, t in enumerate(dates(n)) if i not in skip]
    return ReturnSeries(sym, ts, np.arange(len(ts), dtype=float) + ord(sym[0]))


def test_align_complete():
    panel = align_universe([_series(s, 10) for s in "ABC"])
    assert panel.values.shape == (3, 10)


def test_align_drops_incomplete_symbol():
    panel = align_universe([_series("A", 10), _series("B", 10, skip={4}), _series("C", 10)])
    assert panel.symbols == ("A", "C")
    assert panel.T == 10


def test_align_shared_gap_shrinks_grid():
    panel = align_universe([_series(s, 10, skip={3}) for s in "ABC"])
    assert panel.K == 3
    assert panel.T == 9
    assert dates(10)[3] not in panel.timestamps


def test_align_range_and_errors():
    coll = [_series(s, 10) for s in "ABC"]
    panel = align_universe(coll, dates(10)[2], dates(10)[6])
    assert panel.T == 5
    with pytest.raises(EmptyRangeError):
        align_universe(coll, datetime(2030, 1, 1), None)
    with pytest.raises(InsufficientUniverseError):
        align_universe([_series("A", 10), _series("B", 10, skip={1}), _series("C", 10, skip={2})])


def test_align_idempotent():
    coll = [_series("A", 10), _series("B", 10, skip={4}), _series("C", 10, skip={2}), _series("D", 10)]
    once = align_universe(coll)
    twice = align_universe(once.series())
    assert once.symbols == twice.symbols
    assert once.timestamps == twice.timestamps
    assert np.array_equal(once.values, twice.values)


instants = st.lists(
    st.datetimes(min_value=datetime(1990, 1, 1), max_value=datetime(2030, 1, 1)).map(
        lambda d: d.replace(microsecond=0)
    ),
    min_size=1,
    max_size=8,
    unique=True,
)


@settings(max_examples=50, deadline=None)
@given(
    st.dictionaries(
        st.from_regex(r"[A-Z]{1,4}", fullmatch=True),
        st.tuples(instants, st.floats(min_value=1e-6, max_value=1e6)),
        min_size=1,
        max_size=4,
    )
)
def test_price_table_round_trip(data):
    series = [PriceSeries(sym, sorted(ts), [p * (1 + i) for i in range(len(ts))]) for sym, (ts, p) in data.items()]
    buf = io.StringIO()
    write_price_table(series, buf)
    again = parse_price_table(buf.getvalue())
    assert again == series
    buf2 = io.StringIO()
    write_price_table(again, buf2)
    assert buf2.getvalue() == buf.getvalue()


def test_returns_table_round_trip(rng):
    from conftest import random_panel

    panel = random_panel(rng, 3, 6)
    buf = io.StringIO()
    write_returns_table(panel, buf)
    back = align_universe(read_returns_table(buf.getvalue()))
    assert back.symbols == panel.symbols
    assert np.array_equal(back.values, panel.values)
