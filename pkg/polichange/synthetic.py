"""Schema-conformant synthetic fixtures.

The public 311 and bills datasets are not bundled, so tests and demos run on
generated data whose ground truth (monthly tallies, change month, clustered
bills) is returned alongside the files.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass
from datetime import date, time
from pathlib import Path

import numpy as np

from polichange.ingest.parsers import keyword_dictionary_to_mapping
from polichange.ingest.schemas import (
    BillSchema,
    CategoryMatrix,
    KeywordDictionary,
    Month,
    RequestSchema,
)

logger = logging.getLogger(__name__)

START_MONTH = Month(2008, 1)
N_MONTHS = 120
CHANGE_INDEX = 48
TARGET_AREA = "Hazardous Materials"
CORRELATED_AREAS = ("Food Establishment", "Sanitation Condition", "Rodent")

# Mean monthly requests before the change
BASE_RATES: dict[str, float] = {
    "Water System": 60.0,
    "Dirty Conditions": 30.0,
    "Sanitation Condition": 25.0,
    "Rodent": 20.0,
    "Food Establishment": 18.0,
    "Hazardous Materials": 16.0,
    "Air Quality": 12.0,
    "Indoor Air Quality": 10.0,
    "Food Poisoning": 8.0,
    "Asbestos": 5.0,
    "Smoking": 4.0,
    "Drinking": 3.0,
    "Water Quality": 2.0,
}
RARE_TYPE = "Street Light Condition"
RARE_RATE = 0.4
MALFORMED_REQUESTS = 3

BILLS_PER_MONTH = 20.0
TARGET_BACKGROUND_RATE = 0.05
CLUSTER = {-1: 5, 0: 8, 1: 5}
UNRELATED_TITLES = (
    "Textbook Transparency Act",
    "Relates to school bus routes",
    "Establishes a tax credit for small businesses",
    "Designates a state song",
    "Relates to court filing fees",
)


def generator(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator."""
    return np.random.Generator(np.random.PCG64(seed & 0xFFFFFFFFFFFFFFFF))


def step_series(
    length: int = 96,
    change: int = 48,
    step: float = 3.0,
    seasonal_amplitude: float = 2.0,
    sigma: float = 1.0,
    seed: int = 0,
) -> np.ndarray:
    """Level shift plus a 12-month sinusoid plus Gaussian noise.

    Args:
        length: Months.
        change: First month of the shifted level.
        step: Size of the shift, in units of sigma.
        seasonal_amplitude: Amplitude of the yearly cycle, in units of sigma.
        sigma: Noise standard deviation.
        seed: Noise seed.

    Returns:
        np.ndarray: The series; month 0 is January.
    """
    t = np.arange(length)
    level = np.where(t >= change, step * sigma, 0.0)
    seasonal = seasonal_amplitude * sigma * np.sin(2.0 * math.pi * t / 12.0)
    return level + seasonal + generator(seed).normal(0.0, sigma, length)


def latent_factor_matrix(
    n_correlated: int = 3,
    n_independent: int = 10,
    length: int = 120,
    loading: float = 2.0,
    seed: int = 0,
) -> np.ndarray:
    """Rows sharing a common factor followed by independent rows.

    Correlated rows are loading * z + e with unit-variance noise e, so their
    pairwise correlation is loading**2 / (loading**2 + 1) in expectation.
    """
    rng = generator(seed)
    z = rng.normal(size=length)
    shared = loading * z + rng.normal(size=(n_correlated, length))
    return np.vstack([shared, rng.normal(size=(n_independent, length))])


@dataclass(frozen=True)
class SyntheticFixture:
    """Files written by write_fixture and their ground truth.

    Attributes:
        requests_path: Service-request CSV.
        bills_path: Bills CSV.
        dictionary_path: Keyword dictionary JSON.
        request_counts: Monthly tally of the well-formed requests per category.
        target_bill_counts: Monthly bills written for the target area.
        change_index: Month index of the injected change.
        target_area: Category with the change and the clustered bills.
    """

    requests_path: Path
    bills_path: Path
    dictionary_path: Path
    request_counts: CategoryMatrix
    target_bill_counts: tuple[int, ...]
    change_index: int
    target_area: str


def _request_rates(rng: np.random.Generator, months: int, change: int) -> np.ndarray:
    labels = list(BASE_RATES)
    t = np.arange(months)
    factor = rng.normal(size=months)
    rates = np.empty((len(labels), months))
    for i, label in enumerate(labels):
        mu = BASE_RATES[label]
        phase = rng.uniform(0.0, 2.0 * math.pi)
        row = mu + math.sqrt(mu) * np.sin(2.0 * math.pi * t / 12.0 + phase)
        if label == TARGET_AREA:
            row = row + np.where(t >= change, 3.0 * math.sqrt(mu), 0.0)
        if label in CORRELATED_AREAS:
            row = row + 3.0 * math.sqrt(mu) * factor
        rates[i] = np.clip(row, 0.0, None)
    return rates


def _stamp(rng: np.random.Generator, month: Month) -> tuple[date, time]:
    day = date(month.year, month.month, int(rng.integers(1, 29)))
    moment = time(int(rng.integers(0, 24)), int(rng.integers(0, 60)), int(rng.integers(0, 60)))
    return day, moment


def _write_requests(
    path: Path, rng: np.random.Generator, counts: np.ndarray, rare: np.ndarray
) -> None:
    schema = RequestSchema()
    labels = list(BASE_RATES)
    rows: list[tuple[date, time, str]] = []
    for col in range(counts.shape[1]):
        month = START_MONTH.shift(col)
        for i, label in enumerate(labels):
            rows.extend((*_stamp(rng, month), label) for _ in range(int(counts[i, col])))
        rows.extend((*_stamp(rng, month), RARE_TYPE) for _ in range(int(rare[col])))
    order = rng.permutation(len(rows))
    bad_positions = set(rng.choice(len(rows), size=MALFORMED_REQUESTS, replace=False).tolist())

    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["Unique Key", schema.date_column, schema.type_column, "Borough"])
        for key, idx in enumerate(order, start=1):
            day, moment = rows[idx][0], rows[idx][1]
            stamp = f"{day:%m/%d/%Y} {moment:%I:%M:%S %p}"
            writer.writerow([key, stamp, rows[idx][2].upper() if key % 7 == 0 else rows[idx][2], "BROOKLYN"])
            if key - 1 in bad_positions:
                writer.writerow([f"bad-{key}", "not a date", rows[idx][2], "QUEENS"])


def _write_bills(
    path: Path,
    rng: np.random.Generator,
    dictionary: KeywordDictionary,
    months: int,
    change: int,
) -> list[int]:
    schema = BillSchema()
    keywords = {rule.label: rule.keywords[0] for rule in dictionary.rules}
    areas = [label for label in dictionary.labels if label != TARGET_AREA]
    target = [0] * months
    rows: list[tuple[date, str, str]] = []
    for col in range(months):
        month = START_MONTH.shift(col)
        n_target = int(rng.poisson(TARGET_BACKGROUND_RATE)) + CLUSTER.get(col - change, 0)
        target[col] = n_target
        for _ in range(n_target):
            rows.append((_stamp(rng, month)[0], f"Relates to {keywords[TARGET_AREA]} regulations", "Health"))
        for _ in range(int(rng.poisson(BILLS_PER_MONTH))):
            if rng.random() < 0.4:
                title = UNRELATED_TITLES[int(rng.integers(len(UNRELATED_TITLES)))]
                subject = "Education"
            else:
                area = areas[int(rng.integers(len(areas)))]
                title = f"Relates to {keywords[area]} regulations"
                subject = "Health"
            rows.append((_stamp(rng, month)[0], title, subject))
    rows.sort(key=lambda row: row[0])

    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([schema.date_column, schema.title_column, schema.subject_column])
        for day, title, subject in rows:
            writer.writerow([day.isoformat(), title, subject])
    return target


def write_fixture(
    directory: Path,
    dictionary: KeywordDictionary,
    seed: int = 0,
    months: int = N_MONTHS,
    change_index: int = CHANGE_INDEX,
) -> SyntheticFixture:
    """Write requests.csv, bills.csv and keywords.json into a directory.

    Requests follow Poisson counts with a per-category yearly cycle. The
    target area's rate rises by three standard deviations at change_index,
    the correlated areas share a latent monthly factor, a rare complaint type
    falls below the selection threshold and a few rows carry unparseable
    dates. Bills are spread over all areas, with target-area bills clustered
    in the month before, at and after the change.

    Args:
        directory: Output directory (created if missing).
        dictionary: Keyword dictionary used to title the bills.
        seed: Seed of every random draw.
        months: Length of the request and bill spans.
        change_index: Month index of the change.

    Returns:
        SyntheticFixture: Paths and ground truth.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = generator(seed)

    rates = _request_rates(rng, months, change_index)
    counts = rng.poisson(rates)
    rare = rng.poisson(RARE_RATE, size=months)
    requests_path = directory / "requests.csv"
    _write_requests(requests_path, rng, counts, rare)

    bills_path = directory / "bills.csv"
    target = _write_bills(bills_path, rng, dictionary, months, change_index)

    dictionary_path = directory / "keywords.json"
    dictionary_path.write_text(
        json.dumps(keyword_dictionary_to_mapping(dictionary), indent=2) + "\n", encoding="utf-8"
    )
    logger.info(
        "wrote synthetic fixture with %d requests and change at %s into %s",
        int(counts.sum() + rare.sum()),
        START_MONTH.shift(change_index),
        directory,
    )
    return SyntheticFixture(
        requests_path=requests_path,
        bills_path=bills_path,
        dictionary_path=dictionary_path,
        request_counts=CategoryMatrix.from_array(START_MONTH, list(BASE_RATES), counts),
        target_bill_counts=tuple(target),
        change_index=change_index,
        target_area=TARGET_AREA,
    )
