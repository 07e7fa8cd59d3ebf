import { defineConfig } from 'vitest/config';

// Live-service drive: runs the client against a real server over HTTP.
// Start one first (see the repo verify recipe), then:
//   npx vitest run --config vitest.e2e.config.ts
export default defineConfig({
  test: {
    environment: 'jsdom',
    include: ['e2e/**/*.e2e.ts'],
    testTimeout: 30000,
  },
});
