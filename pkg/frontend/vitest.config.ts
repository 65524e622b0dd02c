import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    environment: 'happy-dom',
    // the suite spawns the Python fixture service and waits for it
    testTimeout: 60_000,
    hookTimeout: 60_000,
    fileParallelism: false,
  },
});
