import {ApiClient, ApiError} from './api';
import {CanvasState} from './canvas';
import type {ResultCard} from './types';

export type PanelStatus = 'idle' | 'loading' | 'results' | 'empty' | 'error';

/**
 * View-model for the Flow Pilot panel: a query box, ranked result cards,
 * and a deploy action that loads the chosen workflow onto the canvas.
 * Pure client: ranking comes from the server untouched.
 */
export class PilotPanel {
  status: PanelStatus = 'idle';
  cards: ResultCard[] = [];
  message = '';
  explored = false;

  constructor(private readonly client: ApiClient) {}

  async search(query: string): Promise<void> {
    this.status = 'loading';
    this.message = '';
    try {
      const response = await this.client.pilotSearch(query);
      this.cards = response.results;
      this.explored = response.explored;
      this.status = this.cards.length > 0 ? 'results' : 'empty';
      if (this.status === 'empty') this.message = 'no workflows found';
    } catch (error) {
      this.cards = [];
      if (error instanceof ApiError && error.status === 404) {
        this.status = 'empty';
        this.message = 'no workflows found';
      } else if (error instanceof ApiError) {
        this.status = 'error';
        this.message = error.message;
      } else {
        this.status = 'error';
        this.message = 'service unreachable';
        throw error;
      }
    }
  }

  /** Fetch the selected workflow and return it as a laid-out canvas. */
  async deploy(workflowId: string): Promise<CanvasState> {
    const document = await this.client.getWorkflow(workflowId);
    return CanvasState.fromDocument(document);
  }
}
