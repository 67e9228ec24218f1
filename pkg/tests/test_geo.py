import threading

import httpx
import pytest

from dtsurv.geo import (
    AmbiguousAddress,
    CompositeResolver,
    FixedResolver,
    GeoTriple,
    HttpGeoResolver,
    NetworkFailure,
    QuotaExceeded,
    StaticFipsResolver,
    UnknownFips,
    resolve_address,
    resolve_fips,
)


class TestStaticResolver:
    def test_known_counties(self):
        assert resolve_fips(35, 1) == GeoTriple(35.017785, -106.629130, 5207.579772)
        assert resolve_fips(35, 5) == GeoTriple(33.475739, -104.472330, 3559.931671)

    def test_unknown_code(self):
        with pytest.raises(UnknownFips):
            resolve_fips(99, 999)

    def test_recode_string_parsing(self):
        r = StaticFipsResolver()
        assert r.resolve("35001") == resolve_fips(35, 1)
        assert r.resolve("35 003") == resolve_fips(35, 3)

    def test_custom_table_file(self, tmp_path):
        path = tmp_path / "geo.csv"
        path.write_text(
            "state_fips,county_fips,address,lat,lng,elevation\n"
            "6,75,San+Francisco+county+CA,37.7749,-122.4194,52.0\n"
        )
        r = StaticFipsResolver(str(path))
        assert r.resolve_fips(6, 75).elevation == 52.0


def mock_http_resolver(handler, cache_path=None):
    transport = httpx.MockTransport(handler)
    client = httpx.Client(transport=transport)
    return HttpGeoResolver(
        "https://geo.test/geocode",
        "https://geo.test/elevation",
        api_key="k",
        cache_path=cache_path,
        client=client,
    )


def good_handler(counter=None):
    def handler(request: httpx.Request) -> httpx.Response:
        if counter is not None:
            counter.append(request.url.path)
        if request.url.path == "/geocode":
            return httpx.Response(
                200,
                json={
                    "status": "OK",
                    "results": [{"geometry": {"location": {"lat": 42.35, "lng": -71.05}}}],
                },
            )
        return httpx.Response(200, json={"status": "OK", "results": [{"elevation": 43.0}]})

    return handler


class TestHttpResolver:
    def test_resolves_and_converts_meters_to_feet(self):
        r = mock_http_resolver(good_handler())
        triple = resolve_address("boston massachusetts", r)
        assert triple.lat == 42.35
        assert triple.lng == -71.05
        assert triple.elevation == pytest.approx(43.0 * 3.280839895, rel=1e-9)

    def test_cache_hit_makes_no_external_calls(self, tmp_path):
        calls = []
        cache = tmp_path / "cache.json"
        r = mock_http_resolver(good_handler(calls), cache_path=str(cache))
        a = r.resolve("Boston  Massachusetts")
        assert len(calls) == 2  # geocode + elevation
        b = r.resolve("boston massachusetts")  # normalizes to the same key
        assert len(calls) == 2
        assert a == b
        # a fresh resolver picks the persisted cache up from disk
        r2 = mock_http_resolver(good_handler(calls), cache_path=str(cache))
        assert r2.resolve("boston massachusetts") == a
        assert len(calls) == 2

    def test_zero_results_is_ambiguous(self):
        def handler(request):
            return httpx.Response(200, json={"status": "ZERO_RESULTS", "results": []})

        with pytest.raises(AmbiguousAddress):
            mock_http_resolver(handler).resolve("nowhere at all")

    def test_quota_exceeded(self):
        def handler(request):
            return httpx.Response(200, json={"status": "OVER_QUERY_LIMIT", "results": []})

        with pytest.raises(QuotaExceeded):
            mock_http_resolver(handler).resolve("boston")

    def test_network_failure(self):
        def handler(request):
            raise httpx.ConnectError("no route")

        with pytest.raises(NetworkFailure):
            mock_http_resolver(handler).resolve("boston")

    def test_http_error_status(self):
        def handler(request):
            return httpx.Response(500, text="oops")

        with pytest.raises(NetworkFailure):
            mock_http_resolver(handler).resolve("boston")

    def test_concurrent_resolution_is_safe(self):
        calls = []
        r = mock_http_resolver(good_handler(calls))
        results = []

        def work():
            results.append(r.resolve("boston massachusetts"))

        threads = [threading.Thread(target=work) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(set(results)) == 1
        assert len(calls) == 2  # calls serialized through the cache


class TestCompositeResolver:
    def test_fips_first_then_address(self):
        double = FixedResolver(GeoTriple(1.0, 2.0, 3.0))
        comp = CompositeResolver(StaticFipsResolver(), double)
        assert comp.resolve("35001").lat == 35.017785
        assert comp.resolve("denver colorado") == GeoTriple(1.0, 2.0, 3.0)

    def test_without_address_resolver_unknown_text_fails(self):
        comp = CompositeResolver(StaticFipsResolver(), None)
        with pytest.raises(UnknownFips):
            comp.resolve("denver colorado")
