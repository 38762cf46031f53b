import { defineConfig } from "vitest/config";

// In dev the service runs separately; proxy API calls so the page and the
// API share an origin, same as when the service hosts the built assets.
export default defineConfig({
  server: {
    proxy: {
      "/intent": "http://127.0.0.1:8000",
      "/metrics": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "jsdom",
  },
});
