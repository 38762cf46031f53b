import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, api } from "../src/api";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("api client", () => {
  it("posts the utterance and returns the parsed body", async () => {
    const fetchMock = vi.fn(async () =>
      jsonResponse(200, {
        session_id: "s1",
        entities: [],
        nile_text: "define intent x:",
        warnings: [],
      }),
    );
    vi.stubGlobal("fetch", fetchMock);

    const resp = await api.sendIntent("add a firewall");
    expect(resp.session_id).toBe("s1");
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("/intent");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({
      utterance: "add a firewall",
    });
  });

  it("sends corrections only when one is given", async () => {
    const fetchMock = vi.fn(async (_url: string, init?: RequestInit) =>
      jsonResponse(200, { status: "confirmed" }),
    );
    vi.stubGlobal("fetch", fetchMock);

    await api.confirm("s1");
    await api.confirm("s1", "define intent x:");
    const plain = JSON.parse(fetchMock.mock.calls[0]![1]!.body as string);
    const corrected = JSON.parse(fetchMock.mock.calls[1]![1]!.body as string);
    expect(plain).toEqual({});
    expect(corrected).toEqual({ corrected_nile: "define intent x:" });
  });

  it("surfaces HTTP error details as ApiError", async () => {
    vi.stubGlobal("fetch", async () =>
      jsonResponse(422, {
        detail: { error: "empty-utterance", guidance: "say something" },
      }),
    );
    const err = await api.sendIntent("").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.detail.error).toBe("empty-utterance");
  });

  it("maps network failure to status 0", async () => {
    vi.stubGlobal("fetch", async () => {
      throw new TypeError("fetch failed");
    });
    const err = await api.metrics().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(0);
  });
});
