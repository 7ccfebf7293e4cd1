// Session credentials are held in memory only; closing the tab forgets them.

export interface Session {
  baseUrl: string;
  apiKey: string;
  userId: string;
  orgKey: string; // needed only for the version-upload form
}

let current: Session | null = null;

export function setSession(session: Session): void {
  current = { ...session, baseUrl: session.baseUrl.replace(/\/+$/, "") };
}

export function getSession(): Session | null {
  return current;
}

export function clearSession(): void {
  current = null;
}
