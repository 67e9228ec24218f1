"""Location resolution: state/county codes or free-text addresses to
(latitude, longitude, elevation-in-feet) triples.

Two interchangeable resolvers sit behind one interface: a bundled static
county lookup for offline batch encoding, and an HTTP client for live
geocode + elevation services with an on-disk cache. Tests inject a fixed
double.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Protocol

import httpx

from .core import DtsurvError

__all__ = [
    "GeoTriple",
    "GeoResolutionFailure",
    "UnknownFips",
    "NetworkFailure",
    "QuotaExceeded",
    "AmbiguousAddress",
    "GeoResolver",
    "StaticFipsResolver",
    "HttpGeoResolver",
    "FixedResolver",
    "CompositeResolver",
    "resolve_fips",
    "resolve_address",
]

FEET_PER_METER = 3.280839895013123
GEO_API_KEY_VAR = "GEO_API_KEY"


class GeoResolutionFailure(DtsurvError):
    """A location could not be turned into a geo triple."""


class UnknownFips(GeoResolutionFailure):
    """The state/county code pair is not in the lookup table."""


class NetworkFailure(GeoResolutionFailure):
    """The external geocoding service could not be reached."""


class QuotaExceeded(GeoResolutionFailure):
    """The external geocoding service refused the request for quota reasons."""


class AmbiguousAddress(GeoResolutionFailure):
    """The address text did not resolve to a usable location."""


@dataclass(frozen=True)
class GeoTriple:
    """Latitude/longitude in degrees, elevation in feet."""

    lat: float
    lng: float
    elevation: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lng <= 180.0:
            raise ValueError(f"longitude {self.lng} outside [-180, 180]")


class GeoResolver(Protocol):
    def resolve(self, value: str) -> GeoTriple: ...


_FIPS_PATTERN = re.compile(r"^\s*(\d{2})[- ]?(\d{3})\s*$")


def normalize_address(address: str) -> str:
    return " ".join(address.lower().split())


class StaticFipsResolver:
    """County lookup from a CSV of state_fips,county_fips,address,lat,lng,elevation."""

    def __init__(self, path: str | os.PathLike | None = None):
        if path is None:
            source = resources.files("dtsurv").joinpath("data/fips_geo.csv")
            text = source.read_text(encoding="utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        self._table: dict[tuple[int, int], GeoTriple] = {}
        self._by_address: dict[str, GeoTriple] = {}
        lines = text.strip().splitlines()
        for line in lines[1:]:  # header row
            state, county, address, lat, lng, elevation = line.split(",")
            triple = GeoTriple(float(lat), float(lng), float(elevation))
            self._table[(int(state), int(county))] = triple
            self._by_address[normalize_address(address.replace("+", " "))] = triple

    def resolve_fips(self, state_fips: int, county_fips: int) -> GeoTriple:
        try:
            return self._table[(int(state_fips), int(county_fips))]
        except KeyError:
            raise UnknownFips(f"no entry for state {state_fips}, county {county_fips}") from None

    def resolve(self, value: str) -> GeoTriple:
        match = _FIPS_PATTERN.match(value)
        if not match:
            key = normalize_address(value.replace("+", " "))
            if key in self._by_address:
                return self._by_address[key]
            raise UnknownFips(f"{value!r} is not a state-county code in the lookup table")
        return self.resolve_fips(int(match.group(1)), int(match.group(2)))


class FixedResolver:
    """Test double: a fixed triple, or a per-value mapping."""

    def __init__(self, triple: GeoTriple | None = None, table: Mapping[str, GeoTriple] | None = None):
        self.triple = triple
        self.table = dict(table or {})
        self.calls = 0

    def resolve(self, value: str) -> GeoTriple:
        self.calls += 1
        key = normalize_address(value)
        if key in self.table:
            return self.table[key]
        if self.triple is not None:
            return self.triple
        raise AmbiguousAddress(f"no fixture for {value!r}")


class HttpGeoResolver:
    """Live geocode + elevation client with an on-disk cache.

    External calls are serialized through the cache lock, so concurrent use
    never queries the same address twice. The elevation service reports
    meters; values are stored in feet.
    """

    def __init__(
        self,
        geocode_url: str,
        elevation_url: str,
        api_key: str | None = None,
        cache_path: str | os.PathLike | None = None,
        client: httpx.Client | None = None,
    ):
        self.geocode_url = geocode_url
        self.elevation_url = elevation_url
        self.api_key = api_key if api_key is not None else os.environ.get(GEO_API_KEY_VAR, "")
        self.cache_path = str(cache_path) if cache_path else None
        self._client = client or httpx.Client(timeout=10.0)
        self._lock = threading.Lock()
        self._cache: dict[str, GeoTriple] = {}
        if self.cache_path and os.path.exists(self.cache_path):
            with open(self.cache_path, encoding="utf-8") as fh:
                for key, (lat, lng, elevation) in json.load(fh).items():
                    self._cache[key] = GeoTriple(lat, lng, elevation)

    def _persist(self) -> None:
        if not self.cache_path:
            return
        doc = {k: [t.lat, t.lng, t.elevation] for k, t in sorted(self._cache.items())}
        tmp = self.cache_path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
        os.replace(tmp, self.cache_path)

    def _get_json(self, url: str, params: dict) -> dict:
        try:
            response = self._client.get(url, params=params)
            response.raise_for_status()
            return response.json()
        except httpx.HTTPError as exc:
            raise NetworkFailure(f"geo service request failed: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise NetworkFailure(f"geo service returned malformed JSON: {exc}") from exc

    def resolve(self, value: str) -> GeoTriple:
        key = normalize_address(value)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
            geocoded = self._get_json(self.geocode_url, {"address": value, "key": self.api_key})
            status = geocoded.get("status", "")
            if status == "OVER_QUERY_LIMIT":
                raise QuotaExceeded(f"geocode quota exceeded for {value!r}")
            results = geocoded.get("results", [])
            if status == "ZERO_RESULTS" or not results:
                raise AmbiguousAddress(f"no geocode result for {value!r}")
            location = results[0]["geometry"]["location"]
            lat, lng = float(location["lat"]), float(location["lng"])

            elevation_doc = self._get_json(
                self.elevation_url, {"locations": f"{lat},{lng}", "key": self.api_key}
            )
            if elevation_doc.get("status") == "OVER_QUERY_LIMIT":
                raise QuotaExceeded(f"elevation quota exceeded for {value!r}")
            elevation_results = elevation_doc.get("results", [])
            if not elevation_results:
                raise AmbiguousAddress(f"no elevation result for {value!r}")
            feet = float(elevation_results[0]["elevation"]) * FEET_PER_METER

            triple = GeoTriple(lat, lng, feet)
            self._cache[key] = triple
            self._persist()
            return triple


class CompositeResolver:
    """State-county codes through the static table, everything else by address."""

    def __init__(self, fips: StaticFipsResolver, address: GeoResolver | None = None):
        self.fips = fips
        self.address = address

    def resolve(self, value: str) -> GeoTriple:
        if _FIPS_PATTERN.match(value):
            return self.fips.resolve(value)
        try:
            return self.fips.resolve(value)
        except UnknownFips:
            if self.address is None:
                raise
            return self.address.resolve(value)


_bundled_resolver: StaticFipsResolver | None = None
_bundled_lock = threading.Lock()


def _bundled() -> StaticFipsResolver:
    global _bundled_resolver
    with _bundled_lock:
        if _bundled_resolver is None:
            _bundled_resolver = StaticFipsResolver()
        return _bundled_resolver


def resolve_fips(state_fips: int, county_fips: int) -> GeoTriple:
    """Exact triple from the bundled county lookup table."""
    return _bundled().resolve_fips(state_fips, county_fips)


def resolve_address(address: str, resolver: GeoResolver) -> GeoTriple:
    """Resolve free-text through a configured live resolver or test double."""
    return resolver.resolve(address)
