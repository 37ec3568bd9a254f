import { defineConfig } from "vitest/config";

// every assertion crosses a process boundary into the core CLI, so tests
// are slow by design
export default defineConfig({
  test: {
    testTimeout: 300_000,
    hookTimeout: 60_000,
  },
});
