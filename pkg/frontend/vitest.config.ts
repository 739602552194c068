import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    environmentOptions: {
      // http (not https) so happy-dom's mixed-content rule lets tests reach
      // the local service over http://127.0.0.1 (browsers exempt loopback,
      // happy-dom does not).
      happyDOM: { url: "http://unit.example/" },
    },
    testTimeout: 30_000,
    hookTimeout: 90_000,
  },
});
