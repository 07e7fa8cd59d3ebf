export { ApiClient, ApiError } from './api';
export { App } from './app';
export { renderChart } from './charts';
export { registerRegions, clearRegions } from './regions';
export { renderInterface, renderViewCell } from './render';
export { ClientSession, loadSession } from './session';
export { controlSnapshot, renderWidget } from './widgets';
export * from './types';
