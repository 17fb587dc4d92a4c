import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { StubService, ndFixture } from "./stub_service";

describe("ApiClient", () => {
  it("lists audits and pages rankings in service order", async () => {
    const stub = new StubService(ndFixture());
    const api = new ApiClient("", stub.fetchFn as unknown as typeof fetch);
    const audits = await api.listAudits();
    expect(audits).toHaveLength(1);
    expect(audits[0].id).toBe("fixture");

    const page = await api.fetchRanking("fixture", "ND", 0, 3);
    expect(page.entries.map((e) => e.rank)).toEqual([1, 2, 3]);
    expect(page.next_offset).toBe(3);
    const rest = await api.fetchRanking("fixture", "ND", 18, 3);
    expect(rest.entries).toHaveLength(2);
    expect(rest.next_offset).toBeNull();
  });

  it("propagates http errors as ApiError", async () => {
    const stub = new StubService(ndFixture());
    const api = new ApiClient("", stub.fetchFn as unknown as typeof fetch);
    await expect(api.fetchRanking("fixture", "LE", 0, 5)).rejects.toThrowError(ApiError);
  });

  it("posts verdicts with the idempotency key", async () => {
    const stub = new StubService(ndFixture());
    const api = new ApiClient("", stub.fetchFn as unknown as typeof fetch);
    const page = await api.fetchRanking("fixture", "ND", 0, 1);
    const resp = await api.postVerdict({
      audit: "fixture",
      issue: "ND",
      subject: page.entries[0].subject,
      decision: "confirm",
      reviewer: "t",
      idempotency_key: "key-1",
    });
    expect(resp.ok).toBe(true);
    expect(stub.log).toHaveLength(1);
    const again = await api.postVerdict({
      audit: "fixture",
      issue: "ND",
      subject: page.entries[0].subject,
      decision: "confirm",
      reviewer: "t",
      idempotency_key: "key-1",
    });
    expect(again.ok).toBe(true);
    expect(stub.log).toHaveLength(1); // deduplicated server-side
  });
});
