export {ApiClient, ApiError} from './api';
export type {FetchLike} from './api';
export {CanvasState} from './canvas';
export type {CanvasNode, ConnectCheck, Edge} from './canvas';
export {pollJob, runWorkflow} from './jobs';
export {PilotPanel} from './pilot';
export {mount} from './main';
export * from './types';
