export interface ViewHandle {
  refresh(): Promise<void>;
}
